#pragma once

#include <stdexcept>
#include <string>

namespace cvae {

struct InvalidInput : std::runtime_error {
    explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateData : std::runtime_error {
    explicit DegenerateData(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotAcyclic : std::runtime_error {
    explicit NotAcyclic(const std::string& msg) : std::runtime_error(msg) {}
};

struct TooLarge : std::runtime_error {
    explicit TooLarge(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonFiniteGradient : std::runtime_error {
    explicit NonFiniteGradient(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidState : std::runtime_error {
    explicit InvalidState(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateSimilarity : std::runtime_error {
    explicit DegenerateSimilarity(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cvae
