#include <cstdio>
#include <string>
#include <vector>

#include "forestmat/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    forestmat::cli::result r = forestmat::cli::run(std::move(args));
    std::fputs(r.output.c_str(), r.exit_code == 0 ? stdout : stderr);
    return r.exit_code;
}
