#include "inp/cli/app.hpp"

int main(int argc, char** argv) { return inp::cli::run(argc, argv); }
