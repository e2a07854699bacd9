#include <string>
#include <vector>

#include "synet/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return synet::run_cli(args);
}
