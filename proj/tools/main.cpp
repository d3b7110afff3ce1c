#include <vector>

#include "snapff/experiment.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return snapff::run_cli(args);
}
