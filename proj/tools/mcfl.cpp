// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "mcfl/cli.hpp"

int main(int argc, char** argv) { return mcfl::main_entry(argc, argv, std::cout, std::cerr); }
