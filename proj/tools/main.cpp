#include <vector>
#include <string>

#include "saltrack/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return saltrack::run_cli(args);
}
