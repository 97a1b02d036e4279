#include <cstdio>
int main() { std::puts("hamwave: placeholder"); return 0; }
