#include "gmt/interval.hpp"

#include <sstream>

namespace gmt {

std::string Interval::to_string() const {
    std::ostringstream os;
    os << ((lo_open || lo == -kInf) ? '(' : '[') << lo << ", " << hi << ((hi_open || hi == kInf) ? ')' : ']');
    return os.str();
}

}  // namespace gmt
