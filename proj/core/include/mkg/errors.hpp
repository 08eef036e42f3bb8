#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mkg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RadiusExceeded : Error {
    using Error::Error;
};

struct DegenerateMetric : Error {
    using Error::Error;
};

struct HypothesisViolated : Error {
    using Error::Error;
};

struct IndefiniteCoupling : Error {
    using Error::Error;
};

struct InvalidFamily : Error {
    using Error::Error;
};

struct NonFinite : Error {
    NonFinite(const std::string& what, long long step, std::size_t site)
        : Error(what), step(step), site(site) {}
    long long step;
    std::size_t site;
};

struct TraceTooShort : Error {
    using Error::Error;
};

struct NonUniformSampling : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& msg, int line, int column)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
          line(line), column(column) {}
    int line;
    int column;
};

struct ValidationError : Error {
    ValidationError(const std::string& key, const std::string& msg)
        : Error(key + ": " + msg), key(key) {}
    std::string key;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace mkg
