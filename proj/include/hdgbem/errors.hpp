#pragma once

#include <stdexcept>
#include <string>

namespace hdgbem {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HDGBEM_DEFINE_ERROR(Name)            \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  };

HDGBEM_DEFINE_ERROR(GeometryInfeasibleError)
HDGBEM_DEFINE_ERROR(MeshingError)
HDGBEM_DEFINE_ERROR(MapConstructionError)
HDGBEM_DEFINE_ERROR(PatchConstructionError)
HDGBEM_DEFINE_ERROR(AssemblyError)
HDGBEM_DEFINE_ERROR(TransferError)
HDGBEM_DEFINE_ERROR(SolverError)
HDGBEM_DEFINE_ERROR(CoverageError)
HDGBEM_DEFINE_ERROR(DimensionError)
HDGBEM_DEFINE_ERROR(DomainError)
HDGBEM_DEFINE_ERROR(OracleError)
HDGBEM_DEFINE_ERROR(EstimationError)
HDGBEM_DEFINE_ERROR(ConfigError)
HDGBEM_DEFINE_ERROR(FormatError)

#undef HDGBEM_DEFINE_ERROR

}  // namespace hdgbem
