// Error taxonomy. Every failure mode callers are expected to distinguish
// gets its own type; everything derives from Error for blanket handling.
#pragma once

#include <stdexcept>
#include <string>

namespace scanlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define SCANLAB_ERROR(name)                                                  \
    struct name : Error {                                                    \
        explicit name(const std::string& msg) : Error(#name ": " + msg) {}  \
    }

// geometry
SCANLAB_ERROR(ZeroNorm);
SCANLAB_ERROR(NotUnit);
SCANLAB_ERROR(Degenerate);

// scene
SCANLAB_ERROR(BadParams);
SCANLAB_ERROR(OutOfBounds);

// planner
SCANLAB_ERROR(NotSPD);
SCANLAB_ERROR(RegionSamplingFailed);
SCANLAB_ERROR(ProjectionMiss);
SCANLAB_ERROR(TooFewPoints);

// simulator
SCANLAB_ERROR(CameraPlacementFailed);
SCANLAB_ERROR(PathTooShort);

// dataset
SCANLAB_ERROR(TooShort);
SCANLAB_ERROR(BadN);
SCANLAB_ERROR(InsufficientDemos);
SCANLAB_ERROR(Empty);
SCANLAB_ERROR(IoError);
SCANLAB_ERROR(CorruptMagic);
SCANLAB_ERROR(Truncation);

// policy / training
SCANLAB_ERROR(BadConfig);
SCANLAB_ERROR(ShapeMismatch);
SCANLAB_ERROR(NonFinite);
SCANLAB_ERROR(NonFiniteLoss);
SCANLAB_ERROR(EmptyEval);

#undef SCANLAB_ERROR

} // namespace scanlab
