#ifndef EPFLOW_CONFIG_HPP
#define EPFLOW_CONFIG_HPP

#include <cstdio>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace epflow {

struct ConfigError : std::runtime_error {
    int line;
    ConfigError(const std::string& msg, int line_ = 0)
        : std::runtime_error(line_ > 0 ? "line " + std::to_string(line_) + ": " + msg : msg),
          line(line_) {}
};

enum class ConfigType { integer, real, string, int_vector };

struct ConfigValue {
    ConfigType type = ConfigType::string;
    long long i = 0;
    double r = 0.0;
    std::string s;
    std::vector<int> iv;

    bool operator==(const ConfigValue&) const = default;
};

/// Flat dotted-key schema; unknown keys are rejected at parse time.
inline const std::map<std::string, ConfigType>& config_schema() {
    static const std::map<std::string, ConfigType> schema{
        {"grid.d", ConfigType::integer},
        {"grid.n", ConfigType::int_vector},
        {"grid.L", ConfigType::real},
        {"sim.t_end", ConfigType::real},
        {"sim.cfl", ConfigType::real},
        {"sim.dt_min", ConfigType::real},
        {"sim.dt_max", ConfigType::real},
        {"sim.dealias", ConfigType::integer},
        {"sim.detect_grad_factor", ConfigType::real},
        {"sim.detect_tail_frac", ConfigType::real},
        {"sim.rhs_form", ConfigType::string},
        {"scenario.kind", ConfigType::string},
        {"scenario.direction", ConfigType::int_vector},
        {"scenario.margin", ConfigType::real},
        {"scenario.kmax", ConfigType::integer},
        {"scenario.amplitude", ConfigType::real},
        {"scenario.epsilon", ConfigType::real},
        {"scenario.p", ConfigType::real},
        {"scenario.r", ConfigType::real},
        {"scenario.N", ConfigType::integer},
        {"scenario.series_kmax", ConfigType::integer},
        {"scenario.M", ConfigType::real},
        {"scenario.sigma", ConfigType::real},
        {"scenario.seed", ConfigType::integer},
        {"scenario.modes", ConfigType::integer},
        {"scenario.init_snapshot", ConfigType::string},
        {"output.series", ConfigType::string},
        {"output.snapshot_every", ConfigType::integer},
        {"output.snapshot_prefix", ConfigType::string},
        {"trace.x0", ConfigType::string},
    };
    return schema;
}

class ConfigDoc {
  public:
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    long long get_int(const std::string& key) const { return require(key, ConfigType::integer).i; }
    long long get_int(const std::string& key, long long dflt) const {
        return has(key) ? get_int(key) : dflt;
    }
    double get_real(const std::string& key) const { return require(key, ConfigType::real).r; }
    double get_real(const std::string& key, double dflt) const {
        return has(key) ? get_real(key) : dflt;
    }
    const std::string& get_string(const std::string& key) const {
        return require(key, ConfigType::string).s;
    }
    std::string get_string(const std::string& key, const std::string& dflt) const {
        return has(key) ? get_string(key) : dflt;
    }
    const std::vector<int>& get_ivec(const std::string& key) const {
        return require(key, ConfigType::int_vector).iv;
    }

    void set_int(const std::string& key, long long v) {
        check_schema(key, ConfigType::integer);
        ConfigValue cv;
        cv.type = ConfigType::integer;
        cv.i = v;
        values_[key] = cv;
    }
    void set_real(const std::string& key, double v) {
        check_schema(key, ConfigType::real);
        ConfigValue cv;
        cv.type = ConfigType::real;
        cv.r = v;
        values_[key] = cv;
    }
    void set_string(const std::string& key, const std::string& v) {
        check_schema(key, ConfigType::string);
        ConfigValue cv;
        cv.type = ConfigType::string;
        cv.s = v;
        values_[key] = cv;
    }
    void set_ivec(const std::string& key, const std::vector<int>& v) {
        check_schema(key, ConfigType::int_vector);
        ConfigValue cv;
        cv.type = ConfigType::int_vector;
        cv.iv = v;
        values_[key] = cv;
    }

    int line_of(const std::string& key) const {
        auto it = lines_.find(key);
        return it == lines_.end() ? 0 : it->second;
    }

    const std::map<std::string, ConfigValue>& entries() const { return values_; }

    bool operator==(const ConfigDoc& o) const { return values_ == o.values_; }

    friend ConfigDoc parse_config(const std::string& text);

  private:
    const ConfigValue& require(const std::string& key, ConfigType t) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
        if (it->second.type != t)
            throw ConfigError("key '" + key + "' has the wrong type", line_of(key));
        return it->second;
    }
    static void check_schema(const std::string& key, ConfigType t) {
        auto it = config_schema().find(key);
        if (it == config_schema().end()) throw ConfigError("unknown key '" + key + "'");
        if (it->second != t) throw ConfigError("type mismatch for key '" + key + "'");
    }

    std::map<std::string, ConfigValue> values_;
    std::map<std::string, int> lines_;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline bool parse_int_token(const std::string& tok, long long& out) {
    if (tok.empty()) return false;
    char* end = nullptr;
    out = std::strtoll(tok.c_str(), &end, 10);
    return end && *end == '\0';
}

inline bool parse_real_token(const std::string& tok, double& out) {
    if (tok.empty()) return false;
    char* end = nullptr;
    out = std::strtod(tok.c_str(), &end);
    return end && *end == '\0';
}

}  // namespace detail

/// Parses `key = value` lines with `#` comments; every key must be in the
/// schema and typed accordingly. Errors carry the offending line number.
inline ConfigDoc parse_config(const std::string& text) {
    ConfigDoc doc;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        lineno++;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        auto it = config_schema().find(key);
        if (it == config_schema().end()) throw ConfigError("unknown key '" + key + "'", lineno);
        if (doc.values_.count(key)) throw ConfigError("duplicate key '" + key + "'", lineno);
        ConfigValue cv;
        cv.type = it->second;
        switch (it->second) {
            case ConfigType::integer:
                if (!detail::parse_int_token(val, cv.i))
                    throw ConfigError("expected an integer for '" + key + "'", lineno);
                break;
            case ConfigType::real:
                if (!detail::parse_real_token(val, cv.r))
                    throw ConfigError("expected a real for '" + key + "'", lineno);
                break;
            case ConfigType::string:
                if (val.empty()) throw ConfigError("expected a value for '" + key + "'", lineno);
                cv.s = val;
                break;
            case ConfigType::int_vector: {
                std::size_t start = 0;
                std::string tok;
                for (std::size_t q = 0; q <= val.size(); q++) {
                    if (q == val.size() || val[q] == ',') {
                        tok = detail::trim(val.substr(start, q - start));
                        long long iv = 0;
                        if (!detail::parse_int_token(tok, iv))
                            throw ConfigError("expected comma-separated integers for '" + key +
                                                  "'",
                                              lineno);
                        cv.iv.push_back(int(iv));
                        start = q + 1;
                    }
                }
                if (cv.iv.empty())
                    throw ConfigError("expected at least one integer for '" + key + "'", lineno);
                break;
            }
        }
        doc.values_[key] = cv;
        doc.lines_[key] = lineno;
    }
    return doc;
}

/// Canonical text: keys sorted, one `key = value` per line, reals at full
/// binary64 precision. emit(parse(emit(doc))) is byte-identical.
inline std::string emit_config(const ConfigDoc& doc) {
    std::string out;
    char buf[64];
    for (const auto& [key, cv] : doc.entries()) {
        out += key;
        out += " = ";
        switch (cv.type) {
            case ConfigType::integer:
                out += std::to_string(cv.i);
                break;
            case ConfigType::real:
                std::snprintf(buf, sizeof buf, "%.17g", cv.r);
                out += buf;
                break;
            case ConfigType::string:
                out += cv.s;
                break;
            case ConfigType::int_vector:
                for (std::size_t q = 0; q < cv.iv.size(); q++) {
                    if (q) out += ",";
                    out += std::to_string(cv.iv[q]);
                }
                break;
        }
        out += "\n";
    }
    return out;
}

}  // namespace epflow

#endif
