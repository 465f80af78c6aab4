#include <exception>
#include <iostream>

#include "dynmte/cli/commands.hpp"

int main(int argc, char** argv) {
    try {
        return dynmte::cli::run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
