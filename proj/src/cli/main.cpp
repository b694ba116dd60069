#include <iostream>

#include "promptroute/cli/app.hpp"

int main(int argc, char** argv) { return promptroute::cli::run(argc, argv, std::cout, std::cerr); }
