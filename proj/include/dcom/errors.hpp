#pragma once

#include <stdexcept>
#include <string>

namespace dcom {

// Base error for the library. `kind()` is a stable machine-readable tag that
// the CLI forwards as JSON on stderr.
class error : public std::runtime_error {
public:
    error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class shape_error : public error {
public:
    explicit shape_error(const std::string& msg) : error("shape", msg) {}
};

class parameter_error : public error {
public:
    explicit parameter_error(const std::string& msg) : error("parameter", msg) {}
};

class validation_error : public error {
public:
    explicit validation_error(const std::string& msg) : error("validation", msg) {}
};

class io_error : public error {
public:
    explicit io_error(const std::string& msg) : error("io", msg) {}
};

class calibration_error : public error {
public:
    explicit calibration_error(const std::string& msg) : error("calibration", msg) {}
};

class mapping_error : public error {
public:
    explicit mapping_error(const std::string& msg) : error("mapping", msg) {}
};

} // namespace dcom
