#include "vpinn/io.hpp"

#include <cstdio>

namespace vpinn {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace vpinn
