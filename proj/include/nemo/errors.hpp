// Exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace nemo {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// netmodel
struct EncapDepthExceeded : Error {
    using Error::Error;
};
struct NoInnerHeader : Error {
    using Error::Error;
};

// simnet
struct EventStorm : Error {
    using Error::Error;
};
struct UnknownNode : Error {
    using Error::Error;
};

// nemo_bs / route_opt
struct UnknownPrefix : Error {
    using Error::Error;
};
struct UnknownCn : Error {
    using Error::Error;
};

// metrics
struct OutOfOrder : Error {
    using Error::Error;
};
struct UnknownFlow : Error {
    using Error::Error;
};

// scenario
struct ParseError : Error {
    int line;
    ParseError(int line_no, const std::string& msg)
        : Error("parse error at line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};
struct ValidationError : Error {
    using Error::Error;
};

}  // namespace nemo
