#include "cli_app.hpp"

int main(int argc, char** argv) { return lle::cli::run(argc, argv); }
