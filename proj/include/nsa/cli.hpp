#pragma once

#include <string>

#include <json.hpp>

#include "nsa/construct.hpp"

namespace nsa::cli {

enum ExitCode : int {
    kOk = 0,
    kRuntime = 1,       // solver or I/O failure outside the categories below
    kValidation = 2,    // rejected arguments or unreadable ledger
    kPartial = 3,       // construction stopped early; partial ledger written
    kVerification = 4,  // an entry failed (re-)verification
};

inline constexpr int kLedgerVersion = 1;

nlohmann::ordered_json ledger_to_json(const construct::ConstructionLedger& ledger);

/// Throws InvalidLedger on schema mismatch.
construct::ConstructionLedger ledger_from_json(const nlohmann::ordered_json& doc);

/// Canonical text form: two-space indent, trailing newline.
std::string serialize(const construct::ConstructionLedger& ledger);
construct::ConstructionLedger parse(const std::string& text);

construct::ConstructionLedger load_ledger(const std::string& path);
void save_ledger(const construct::ConstructionLedger& ledger, const std::string& path);

/// Entry point of the nsaccum tool; returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace nsa::cli
