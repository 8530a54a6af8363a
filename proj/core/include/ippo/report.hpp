#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ippo/experiment.hpp"

namespace ippo {

inline constexpr std::string_view kTrainingCsvHeader =
    "episode,steps,return,success,smoothness,L_clip,L_vf,L_ent,L_inverse,"
    "entropy_coeff,ms_ratio,grad_norm";
inline constexpr std::string_view kTrajectoryCsvHeader =
    "step,substep,x,y,yaw,action,r_target,r_collision,r_dis,r_track,r_total";
inline constexpr std::string_view kEvalCsvHeader =
    "episode,steps,return,success,smoothness";

/// Shortest decimal form that parses back to the same double.
std::string format_number(double value);

std::string training_csv(const std::vector<EpisodeRow>& rows);
std::string eval_csv(const std::vector<EvalEpisode>& episodes);
std::string trajectory_csv(const std::vector<TrajectoryRow>& rows);

/// World-to-viewport plot: obstacles as shapes, the start-target line dashed,
/// one solid polyline per trajectory.
std::string trajectory_svg(const ScenarioSpec& scenario,
                           const std::vector<std::vector<TrajectoryRow>>& paths);

/// Writes `text` to `path`, creating parent directories. Throws Error on
/// I/O failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace ippo
