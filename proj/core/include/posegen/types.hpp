#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "posegen/mat.hpp"

namespace posegen {

/// Per-frame head state: 3 rotation angles (pitch, yaw, roll; radians),
/// 3 translation components (normalized scene units), 2 gaze angles
/// (yaw, pitch; radians). Flat layout rx,ry,rz,tx,ty,tz,gx,gy.
struct PoseFrame {
    std::array<float, 3> rotation{};
    std::array<float, 3> translation{};
    std::array<float, 2> gaze{};

    static constexpr int kDim = 8;

    static PoseFrame from_row(const float* row) {
        PoseFrame f;
        f.rotation = {row[0], row[1], row[2]};
        f.translation = {row[3], row[4], row[5]};
        f.gaze = {row[6], row[7]};
        return f;
    }

    void to_row(float* row) const {
        row[0] = rotation[0];
        row[1] = rotation[1];
        row[2] = rotation[2];
        row[3] = translation[0];
        row[4] = translation[1];
        row[5] = translation[2];
        row[6] = gaze[0];
        row[7] = gaze[1];
    }
};

/// A fixed-rate sequence of pose frames, stored as a T x D matrix.
struct PoseSequence {
    MatF values; // T x D
    int fps = 25;

    int length() const { return static_cast<int>(values.rows()); }
    int dim() const { return static_cast<int>(values.cols()); }

    PoseFrame frame(int t) const { return PoseFrame::from_row(values.row(t).data()); }

    void set_frame(int t, const PoseFrame& f) { f.to_row(values.row(t).data()); }
};

/// Throws ValidationError if the sequence violates its invariants
/// (T >= 2, fps > 0, finite values, |rotation| < pi when D == 8).
void validate_pose_sequence(const PoseSequence& seq);

/// Text-plus-audio condition for the diffusion model. When is_null is set the
/// payloads are ignored and the denoiser substitutes its learned null token.
struct ConditionBundle {
    VecF text_embedding;  // E_t
    MatF audio_features;  // T_a x E_a
    bool is_null = false;

    static ConditionBundle null() {
        ConditionBundle c;
        c.is_null = true;
        return c;
    }
};

/// Per-dimension normalization statistics (population convention).
struct NormStats {
    VecD mean;
    VecD stddev;
    std::vector<bool> degenerate; // dims whose raw std fell below the floor

    int dim() const { return static_cast<int>(mean.size()); }
};

enum class MotionClass { nod, shake, still };

const char* to_string(MotionClass c);
MotionClass motion_class_from_string(const std::string& s);

/// Recipe for one synthetic sample. The seed fully determines the output.
struct SyntheticSpec {
    MotionClass label = MotionClass::nod;
    double amplitude = 0.15;      // radians
    double frequency = 1.171875;  // Hz; 3 cycles per 64-frame window at 25 fps
    double coupling = 0.6;        // audio-energy amplitude coupling
    double noise_scale = 0.01;
    int length = 64;
    int fps = 25;
    std::uint64_t seed = 0;
};

/// Throws ValidationError on out-of-range fields.
void validate_synthetic_spec(const SyntheticSpec& spec);

/// One dataset entry: paths are relative to the manifest file.
struct DatasetRecord {
    std::string pose;
    std::string text;
    std::string audio;
    std::string label;
};

} // namespace posegen
