#pragma once

#include <stdexcept>
#include <string>

namespace hiord {

/// Precondition or validation failure raised by any hiord component.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw Error(what);
}

}  // namespace hiord
