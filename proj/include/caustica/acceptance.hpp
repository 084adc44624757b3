#pragma once

// The library's acceptance suite: fourteen property checks with analytic or
// independently computed targets, shared by the acceptance test and the
// `verify-all` subcommand.

#include <functional>
#include <string>
#include <vector>

namespace caustica {

struct CriterionResult {
    int id = 0;
    std::string name;
    std::string quantity;   // what `value` measures
    double value = 0.0;     // the governing measured quantity
    double tolerance = 0.0; // its bound
    bool lower_bound = false; // value must exceed tolerance instead of staying below it
    bool pass = false;
    std::string detail;     // the other measured parts of the criterion
};

struct Criterion {
    int id;
    std::string name;
    std::function<CriterionResult()> run;
};

const std::vector<Criterion>& acceptance_criteria();

// Runs one criterion, turning an exception into a failed result.
CriterionResult run_criterion(const Criterion& c);

// "PASS [ 3] name: quantity = value (tolerance tol) detail"
std::string format_result(const CriterionResult& r);

}  // namespace caustica
