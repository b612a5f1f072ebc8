#include "noisespec/cli.hpp"

int main(int argc, char** argv) { return noisespec::cli::run(argc, argv); }
