#pragma once

#include <stdexcept>
#include <string>

namespace paleo {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or inconsistent input data (CLI exit code 2).
class InputError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure could not produce a result (CLI exit code 3).
class NumericalError : public Error {
public:
    using Error::Error;
};

class NoOverlap : public InputError {
public:
    NoOverlap() : InputError("series have no overlapping years") {}
};

class DegenerateBaseline : public InputError {
public:
    using InputError::InputError;
};

class NoCompleteBlock : public InputError {
public:
    using InputError::InputError;
};

class MissingDataError : public InputError {
public:
    using InputError::InputError;
};

class BlockMismatch : public InputError {
public:
    using InputError::InputError;
};

class SpecError : public InputError {
public:
    using InputError::InputError;
};

class FormatError : public InputError {
public:
    FormatError(std::size_t line, const std::string& what)
        : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateId : public InputError {
public:
    explicit DuplicateId(const std::string& id)
        : InputError("duplicate record id '" + id + "'"), id_(id) {}

    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class DegenerateColumn : public NumericalError {
public:
    explicit DegenerateColumn(const std::string& id)
        : NumericalError("column '" + id + "' has zero variance over the fit window"), id_(id) {}

    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class InsufficientCalibration : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularFit : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateTruth : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double last_change)
        : NumericalError(what + " (last relative change " + std::to_string(last_change) + ")"),
          last_change_(last_change) {}

    double last_change() const noexcept { return last_change_; }

private:
    double last_change_;
};

}  // namespace paleo
