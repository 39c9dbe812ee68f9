// Catch2 runtime, compiled once and linked into every test binary.
#include <catch2/catch_amalgamated.cpp>
