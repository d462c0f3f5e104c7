#include "posegen/types.hpp"

#include <cmath>

#include "posegen/errors.hpp"

namespace posegen {

void validate_pose_sequence(const PoseSequence& seq) {
    if (seq.length() < 2)
        throw ValidationError("pose sequence must have at least 2 frames, got " +
                              std::to_string(seq.length()));
    if (seq.fps <= 0)
        throw ValidationError("fps must be positive, got " + std::to_string(seq.fps));
    const int t = seq.length();
    const int d = seq.dim();
    for (int i = 0; i < t; ++i) {
        for (int j = 0; j < d; ++j) {
            const float v = seq.values(i, j);
            if (!std::isfinite(v))
                throw ValidationError("non-finite value at row " + std::to_string(i) +
                                      ", column " + std::to_string(j));
            if (d == PoseFrame::kDim && j < 3 && std::abs(v) >= static_cast<float>(M_PI))
                throw ValidationError("rotation out of range at row " + std::to_string(i) +
                                      ", column " + std::to_string(j));
        }
    }
}

const char* to_string(MotionClass c) {
    switch (c) {
        case MotionClass::nod: return "nod";
        case MotionClass::shake: return "shake";
        case MotionClass::still: return "still";
    }
    return "?";
}

MotionClass motion_class_from_string(const std::string& s) {
    if (s == "nod") return MotionClass::nod;
    if (s == "shake") return MotionClass::shake;
    if (s == "still") return MotionClass::still;
    throw ValidationError("unknown motion class '" + s + "' (expected nod, shake or still)");
}

void validate_synthetic_spec(const SyntheticSpec& spec) {
    if (spec.amplitude < 0)
        throw ValidationError("synthetic amplitude must be >= 0");
    if (spec.amplitude >= M_PI)
        throw ValidationError("synthetic amplitude must stay below pi radians");
    if (spec.fps <= 0)
        throw ValidationError("synthetic fps must be positive");
    if (!(spec.frequency > 0) || spec.frequency >= 0.5 * spec.fps)
        throw ValidationError("synthetic frequency must lie in (0, fps/2)");
    if (spec.noise_scale < 0)
        throw ValidationError("synthetic noise scale must be >= 0");
    if (spec.coupling < 0)
        throw ValidationError("synthetic coupling must be >= 0");
    if (spec.length < 2)
        throw ValidationError("synthetic length must be >= 2");
}

} // namespace posegen
