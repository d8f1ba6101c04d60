#pragma once

#include <stdexcept>
#include <string>

namespace bondlens {

// Domain failure categories. Each category maps to a distinct nonzero
// process exit code so scripted callers can tell failure modes apart.
enum class ErrorCode {
    io = 2,
    parse = 3,
    insufficient_data = 4,
    ordering = 5,
    sanity_range = 6,
    division_by_zero = 7,
    degenerate_probability = 8,
    calibration_infeasible = 9,
    index_out_of_range = 10,
    probability_range = 11,
    extrapolation = 12,
    unattainable_price = 13,
    non_identifiable = 14,
    indeterminate_sigma = 15,
    wrong_branch = 16,
    numeric_domain = 17,
    oracle_size = 18,
    bad_argument = 19,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }
    int exit_code() const { return static_cast<int>(code_); }

  private:
    ErrorCode code_;
};

}  // namespace bondlens
