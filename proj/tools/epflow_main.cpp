#include "epflow/cli.hpp"

int main(int argc, char** argv) { return epflow::cli_dispatch(argc, argv); }
