// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "phnet/cli.hpp"

int main(int argc, char** argv) { return phnet::cli::run(argc, argv, std::cout, std::cerr); }
