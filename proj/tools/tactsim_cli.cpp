#include <cstdio>

int main() {
    std::puts("tactsim: command-line interface under construction");
    return 2;
}
