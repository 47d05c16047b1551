#include "phaseres/cli.hpp"

int main(int argc, char** argv) { return phaseres::cli::run(argc, argv); }
