#pragma once

#include <stdexcept>
#include <string>

namespace tdsvrg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// linalg
struct SingularMatrix : Error { using Error::Error; };
struct NotSymmetric : Error { using Error::Error; };
struct NotStochastic : Error { using Error::Error; };
struct NonUniqueStationary : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// mdp
struct InvalidDiscount : Error { using Error::Error; };
struct SingularA : Error { using Error::Error; };
struct NonPositiveLambda : Error { using Error::Error; };
struct NotMixing : Error { using Error::Error; };

// sampling
struct HorizonExceeded : Error { using Error::Error; };
struct EmptySource : Error { using Error::Error; };
struct MissingOracle : Error { using Error::Error; };

// learners
struct DivergenceDetected : Error { using Error::Error; };
struct InvalidRadius : Error { using Error::Error; };

// analysis
struct MissingInput : Error { using Error::Error; };
struct SingularC : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct MisalignedTraces : Error { using Error::Error; };

// io
struct IoError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

} // namespace tdsvrg
