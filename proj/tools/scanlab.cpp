#include <cstdio>

int main() {
    std::puts("scanlab: subcommands pending");
    return 1;
}
