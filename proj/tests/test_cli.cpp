#include <catch2/catch_amalgamated.hpp>
#include "ockg/ockg.hpp"
