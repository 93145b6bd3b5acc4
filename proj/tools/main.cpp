#include "fraclap/cli.hpp"

int main(int argc, char** argv) {
    return fraclap::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
