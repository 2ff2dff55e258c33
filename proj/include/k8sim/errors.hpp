#pragma once

#include <stdexcept>
#include <string>

namespace k8sim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define K8SIM_DEFINE_ERROR(Name)              \
  class Name : public Error {                 \
   public:                                    \
    explicit Name(const std::string& what)    \
        : Error(#Name ": " + what) {}         \
  }

// cost model
K8SIM_DEFINE_ERROR(UnknownImage);
K8SIM_DEFINE_ERROR(UnknownWorkflow);
K8SIM_DEFINE_ERROR(UnknownService);

// engine
K8SIM_DEFINE_ERROR(OrphanService);
K8SIM_DEFINE_ERROR(ReleaseOverflow);

// traffic
K8SIM_DEFINE_ERROR(UnroutableService);

// metrics
K8SIM_DEFINE_ERROR(DuplicateSample);
K8SIM_DEFINE_ERROR(EmptyWindow);

// io
K8SIM_DEFINE_ERROR(ParseError);
K8SIM_DEFINE_ERROR(ValidationError);
K8SIM_DEFINE_ERROR(SchemaError);
K8SIM_DEFINE_ERROR(CoverageError);
K8SIM_DEFINE_ERROR(NoOverlap);
K8SIM_DEFINE_ERROR(IoError);

#undef K8SIM_DEFINE_ERROR

}  // namespace k8sim
