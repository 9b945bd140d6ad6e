// placeholder entry point; subcommands are wired up in a later commit of this file
#include <cstdio>

int main() {
    std::puts("nnpde: not yet wired");
    return 2;
}
