#include <string>
#include <vector>

#include "rcc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return rcc::cli_dispatch(args);
}
