#include "cli.hpp"

int main(int argc, char** argv) { return spkde::cli::run(argc, argv); }
