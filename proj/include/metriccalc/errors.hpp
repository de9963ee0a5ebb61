#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mc {

// Mathematical invariant violated at runtime (triangle inequality, rank
// mismatch, determinant floor, ...). Carries structured witness data so the
// CLI can emit violations.json and exit 2. Precondition/usage problems keep
// throwing std::invalid_argument.
class ViolationError : public std::runtime_error {
public:
    using Detail = std::vector<std::pair<std::string, std::string>>;

    ViolationError(std::string kind, const std::string& message, Detail detail = {})
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)), detail_(std::move(detail)) {}

    const std::string& kind() const { return kind_; }
    const Detail& detail() const { return detail_; }

private:
    std::string kind_;
    Detail detail_;
};

} // namespace mc
