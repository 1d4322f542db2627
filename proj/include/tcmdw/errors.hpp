#pragma once

#include <stdexcept>
#include <string>

namespace tcmdw {

// Error taxonomy shared across the engine. Row-level problems during ETL and
// fact loading are reported as values (RejectRecord / FactOutcome), never as
// exceptions; Error is reserved for call-level failures.
enum class ErrorCode {
    // schema / model
    SyntaxError,
    DuplicateName,
    MissingSection,
    InvalidSchema,
    // storage
    PathNotEmpty,
    UnknownTable,
    MissingAttribute,
    UnknownLevel,
    UnknownDimension,
    CorruptManifest,
    DigestMismatch,
    WarehouseLocked,
    StaleWarehouse,
    // etl
    SourceUnreadable,
    HeaderMismatch,
    ConfigInvalid,
    InvalidConfig,
    // cube / query
    UnknownMeasure,
    AtApex,
    AtBase,
    AmbiguousHierarchy,
    StaleCube,
    // metadata
    DuplicateBatch,
    NotFound,
    // report
    UnknownReport,
    MissingParam,
    // misc
    BadValue,
    IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace tcmdw
