#include "overlap_lab/cli.hpp"

int main(int argc, char** argv) {
    return overlap_lab::cli::run(argc, argv);
}
