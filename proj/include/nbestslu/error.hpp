#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace nbest {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape or size mismatch between tensors / sequences.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Malformed input file; message carries "<path>:<line>: ..." where known.
class ParseError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void format_into(std::ostringstream&) {}

template <typename T, typename... Rest>
void format_into(std::ostringstream& os, const T& head, const Rest&... rest) {
    os << head;
    format_into(os, rest...);
}

} // namespace detail

template <typename... Args>
std::string format_msg(const Args&... args) {
    std::ostringstream os;
    detail::format_into(os, args...);
    return os.str();
}

} // namespace nbest
