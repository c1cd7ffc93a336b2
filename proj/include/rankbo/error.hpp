#pragma once

#include <stdexcept>
#include <string>

namespace rankbo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArchitectureError : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class NumericError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class EmptySupportError : public Error { public: using Error::Error; };
class DegenerateListError : public Error { public: using Error::Error; };
class SchemaError : public Error { public: using Error::Error; };
class ExhaustedPoolError : public Error { public: using Error::Error; };
class AlignmentError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };

}  // namespace rankbo
