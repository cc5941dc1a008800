#include "uma/cli.hpp"

int main(int argc, char** argv) {
    return uma::cli_main(argc, argv);
}
