#pragma once

#include <stdexcept>
#include <string>

namespace dbmf {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotSPD : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct EmptyInput : Error {
    using Error::Error;
};
struct DegenerateDistribution : Error {
    using Error::Error;
};
struct InvalidBandwidth : Error {
    using Error::Error;
};
struct ZeroVector : Error {
    using Error::Error;
};
struct InvalidK : Error {
    using Error::Error;
};
struct LabelOutOfRange : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct InconsistentDim : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct TooFewSamples : Error {
    using Error::Error;
};
struct OneClassOnly : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct NumericalFailure : Error {
    using Error::Error;
};

}  // namespace dbmf
