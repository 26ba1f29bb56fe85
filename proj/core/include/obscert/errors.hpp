#pragma once

#include <stdexcept>
#include <string>

namespace obscert {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonInvertible : public Error { public: using Error::Error; };
class BracketFailure : public Error { public: using Error::Error; };
class HypothesisViolation : public Error { public: using Error::Error; };
class InvariantViolation : public Error { public: using Error::Error; };
class QuadratureFailure : public Error { public: using Error::Error; };
class UnsupportedDimension : public Error { public: using Error::Error; };
class DegenerateFit : public Error { public: using Error::Error; };
class ResolutionError : public Error { public: using Error::Error; };

class NotThick : public Error {
public:
    NotThick(const std::string& what, std::size_t offset, double fraction)
        : Error(what), offset_(offset), fraction_(fraction) {}
    // Flat grid index of the first translate whose measure fraction fell short.
    std::size_t offset() const noexcept { return offset_; }
    double fraction() const noexcept { return fraction_; }

private:
    std::size_t offset_;
    double fraction_;
};

class SingularGramian : public Error {
public:
    SingularGramian(const std::string& what, std::string null_direction)
        : Error(what), null_direction_(std::move(null_direction)) {}
    const std::string& null_direction() const noexcept { return null_direction_; }

private:
    std::string null_direction_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string path, int line = 0, int column = 0)
        : Error(what), path_(std::move(path)), line_(line), column_(column) {}
    const std::string& path() const noexcept { return path_; }
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    std::string path_;
    int line_;
    int column_;
};

}  // namespace obscert
