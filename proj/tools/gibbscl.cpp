#include "gibbscl/harness.hpp"

int main(int argc, char** argv) { return gibbscl::run_cli(argc, argv); }
