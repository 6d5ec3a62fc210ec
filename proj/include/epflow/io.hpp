#ifndef EPFLOW_IO_HPP
#define EPFLOW_IO_HPP

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "diagnostics.hpp"
#include "dynamics.hpp"

namespace epflow {

static_assert(std::endian::native == std::endian::little,
              "snapshot format assumes a little-endian host");

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- snapshots: one-line JSON header + raw binary64 payload -----------------

/// Writes the momentum field: header line then the components in order,
/// row-major with the last axis fastest. read_snapshot is bit-exact.
inline void write_snapshot(const SimState& state, const std::string& path) {
    const Grid& g = state.m.grid;
    nlohmann::json header;
    header["byte_order"] = "little";
    header["d"] = g.dim();
    std::vector<int> n;
    std::vector<double> L;
    std::vector<std::string> fields;
    for (int a = 0; a < g.dim(); a++) {
        n.push_back(g.n(a));
        L.push_back(g.length(a));
    }
    for (int i = 0; i < g.dim(); i++) fields.push_back("m" + std::to_string(i + 1));
    header["n"] = n;
    header["L"] = L;
    header["t"] = state.t;
    header["fields"] = fields;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << header.dump() << "\n";
    for (int i = 0; i < g.dim(); i++)
        out.write(reinterpret_cast<const char*>(state.m[i].values.data()),
                  std::streamsize(state.m[i].values.size() * sizeof(double)));
    if (!out) throw IoError("short write to '" + path + "'");
}

inline SimState read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string header_line;
    if (!std::getline(in, header_line)) throw FormatError("missing snapshot header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad snapshot header: ") + e.what());
    }
    try {
        if (header.at("byte_order").get<std::string>() != "little")
            throw FormatError("unsupported byte order");
        const int d = header.at("d").get<int>();
        const auto n = header.at("n").get<std::vector<int>>();
        const auto L = header.at("L").get<std::vector<double>>();
        const auto fields = header.at("fields").get<std::vector<std::string>>();
        if (int(n.size()) != d || int(L.size()) != d || int(fields.size()) != d)
            throw FormatError("snapshot header is inconsistent");
        std::array<int, 3> na{1, 1, 1};
        std::array<double, 3> La{1.0, 1.0, 1.0};
        for (int a = 0; a < d; a++) {
            na[std::size_t(a)] = n[std::size_t(a)];
            La[std::size_t(a)] = L[std::size_t(a)];
        }
        const Grid g(d, na, La);
        SimState st;
        st.t = header.at("t").get<double>();
        st.m = VectorField(g);
        for (int i = 0; i < d; i++) {
            auto& v = st.m[i].values;
            in.read(reinterpret_cast<char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
            if (std::size_t(in.gcount()) != v.size() * sizeof(double))
                throw FormatError("snapshot payload truncated");
        }
        char extra;
        if (in.read(&extra, 1)) throw FormatError("snapshot payload has trailing bytes");
        if (!st.m.all_finite()) throw FormatError("snapshot holds non-finite samples");
        st.u = velocity_of(st.m);
        return st;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad snapshot header: ") + e.what());
    }
}

// ---- time-series CSV ----------------------------------------------------------

inline const char* series_header() {
    return "t,dt,H,grad_linf,besov_1_inf_inf,dir_residual,g_char,tail_frac,cum_grad_integral";
}

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string series_to_csv(const std::vector<SeriesRow>& rows) {
    std::string out = series_header();
    out += "\n";
    for (const auto& r : rows) {
        const double cols[9] = {r.t,          r.dt,        r.H,
                                r.grad_linf,  r.besov_1_inf_inf, r.dir_residual,
                                r.g_char,     r.tail_frac, r.cum_grad_integral};
        for (int c = 0; c < 9; c++) {
            if (c) out += ",";
            out += format_g17(cols[c]);
        }
        out += "\n";
    }
    return out;
}

inline void write_series_csv(const std::vector<SeriesRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << series_to_csv(rows);
    if (!out) throw IoError("short write to '" + path + "'");
}

inline std::vector<SeriesRow> parse_series_csv(const std::string& text) {
    std::vector<SeriesRow> rows;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty series file");
    if (line != series_header()) throw FormatError("unexpected series header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double cols[9];
        int c = 0;
        std::size_t start = 0;
        for (std::size_t q = 0; q <= line.size() && c < 9; q++) {
            if (q == line.size() || line[q] == ',') {
                cols[c++] = std::strtod(line.substr(start, q - start).c_str(), nullptr);
                start = q + 1;
            }
        }
        if (c != 9) throw FormatError("series row with wrong column count");
        SeriesRow r;
        r.t = cols[0];
        r.dt = cols[1];
        r.H = cols[2];
        r.grad_linf = cols[3];
        r.besov_1_inf_inf = cols[4];
        r.dir_residual = cols[5];
        r.g_char = cols[6];
        r.tail_frac = cols[7];
        r.cum_grad_integral = cols[8];
        rows.push_back(r);
    }
    return rows;
}

inline std::vector<SeriesRow> read_series_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_series_csv(ss.str());
}

// ---- blow-up certificates -------------------------------------------------------

inline nlohmann::json certificate_to_json(const BlowupCertificate& c) {
    nlohmann::json j;
    j["g0"] = c.g0;
    j["E"] = c.E;
    j["T_bound"] = c.T_bound;
    j["margin"] = c.margin;
    std::vector<double> x0;
    std::vector<int> dir;
    for (int a = 0; a < c.direction.d; a++) {
        x0.push_back(c.x0[std::size_t(a)]);
        dir.push_back(c.direction.z[std::size_t(a)]);
    }
    j["x0"] = x0;
    j["direction"] = dir;
    return j;
}

inline BlowupCertificate certificate_from_json(const nlohmann::json& j) {
    BlowupCertificate c;
    try {
        c.g0 = j.at("g0").get<double>();
        c.E = j.at("E").get<double>();
        c.T_bound = j.at("T_bound").get<double>();
        c.margin = j.at("margin").get<double>();
        const auto x0 = j.at("x0").get<std::vector<double>>();
        const auto dir = j.at("direction").get<std::vector<int>>();
        if (x0.size() != dir.size()) throw FormatError("certificate x0/direction mismatch");
        c.direction = DirectionSpec(dir);
        for (std::size_t a = 0; a < x0.size(); a++) c.x0[a] = x0[a];
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad certificate: ") + e.what());
    }
    return c;
}

inline void write_certificate(const BlowupCertificate& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << certificate_to_json(c).dump(2) << "\n";
}

inline BlowupCertificate read_certificate(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad certificate: ") + e.what());
    }
    return certificate_from_json(j);
}

// ---- traces ------------------------------------------------------------------

inline void write_trace_csv(const CharTrace& tr, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "t";
    for (int a = 0; a < tr.direction.d; a++) out << ",x" << a + 1;
    out << ",g\n";
    for (std::size_t q = 0; q < tr.times.size(); q++) {
        out << format_g17(tr.times[q]);
        for (int a = 0; a < tr.direction.d; a++)
            out << "," << format_g17(tr.positions[q][std::size_t(a)]);
        out << "," << format_g17(tr.g_values[q]) << "\n";
    }
}

}  // namespace epflow

#endif
