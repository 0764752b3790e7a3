#ifndef EEGFEAT_ERROR_HPP
#define EEGFEAT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace eegfeat {

// Base for everything this library throws on bad data or bad parameters.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input bytes/text (EDF, CSV, artifact files). Messages carry the
// byte offset / row / record index where decoding failed.
struct ParseError : Error {
    using Error::Error;
};

// A precondition on an operation's parameters does not hold.
struct ParamError : Error {
    using Error::Error;
};

// Matrix/vector dimensions disagree with what an operation expects.
struct ShapeError : Error {
    using Error::Error;
};

// Bad configuration file or unknown config key. The CLI maps this to
// exit status 1; every other Error maps to exit status 2.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace eegfeat

#endif
