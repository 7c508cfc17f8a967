#include <cstdio>
#include "confdim/verify.hpp"
#include "confdim/dimension.hpp"
int main(){ std::puts("cli placeholder"); return 0; }
