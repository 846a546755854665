#include "primer/harness.hpp"

int main(int argc, char** argv) { return primer::cli_main(argc, argv); }
