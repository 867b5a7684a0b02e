#pragma once

#include <stdexcept>
#include <string>

namespace rcc {

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// clinical_ingest
struct MissingColumn : DataError { using DataError::DataError; };
struct BadEnumValue : DataError { using DataError::DataError; };
struct NegativeTime : DataError { using DataError::DataError; };
struct UnknownGrade : DataError { using DataError::DataError; };
struct UnknownEvent : DataError { using DataError::DataError; };

// imaging
struct ImageSmallerThanPatch : DataError { using DataError::DataError; };
struct UnsupportedDim : DataError { using DataError::DataError; };
struct DimensionMismatch : DataError { using DataError::DataError; };
struct EmptyTissueMask : DataError { using DataError::DataError; };

// mil
struct BadLabel : DataError { using DataError::DataError; };
struct SingleClassDataset : DataError { using DataError::DataError; };
struct EmptyDataset : DataError { using DataError::DataError; };

// survival
struct EmptyInput : DataError { using DataError::DataError; };
struct EmptyGroup : DataError { using DataError::DataError; };
struct NoEvents : DataError { using DataError::DataError; };
struct NonConvergence : DataError { using DataError::DataError; };
struct ConstantCovariate : DataError { using DataError::DataError; };
struct Separation : DataError { using DataError::DataError; };
struct NoPermissiblePairs : DataError { using DataError::DataError; };
struct DegenerateGroups : DataError { using DataError::DataError; };

// metrics
struct SingleClass : DataError { using DataError::DataError; };

// nomogram
struct DegenerateRange : DataError { using DataError::DataError; };
struct ZeroBeta : DataError { using DataError::DataError; };
struct MissingCovariate : DataError { using DataError::DataError; };
struct CutoffUnset : DataError { using DataError::DataError; };
struct HorizonBeyondFollowUp : DataError { using DataError::DataError; };

// cli_report
struct EmptyCurve : DataError { using DataError::DataError; };

}  // namespace rcc
