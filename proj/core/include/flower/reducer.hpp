#pragma once

#include "flower/journal.hpp"
#include "flower/model.hpp"

#include <span>
#include <string_view>

namespace flower {

namespace event {
inline constexpr std::string_view kCreateCase = "create_case";
inline constexpr std::string_view kAnnotateAttacker = "annotate_attacker";
inline constexpr std::string_view kAddTarget = "add_target";
inline constexpr std::string_view kRecordInitialCompromise = "record_initial_compromise";
inline constexpr std::string_view kRecordMove = "record_move";
inline constexpr std::string_view kRecordAction = "record_action";
inline constexpr std::string_view kPoseQuestion = "pose_question";
inline constexpr std::string_view kWithdrawQuestion = "withdraw_question";
inline constexpr std::string_view kPlanCollection = "plan_collection";
inline constexpr std::string_view kAttachCollected = "attach_collected";
inline constexpr std::string_view kApplyFilter = "apply_filter";
inline constexpr std::string_view kProposeHypothesis = "propose_hypothesis";
inline constexpr std::string_view kRecordCheck = "record_check";
inline constexpr std::string_view kAnswerQuestion = "answer_question";
inline constexpr std::string_view kOpenIteration = "open_iteration";
inline constexpr std::string_view kRegisterKey = "register_key";
inline constexpr std::string_view kIngestEvidence = "ingest_evidence";
inline constexpr std::string_view kVerifyItem = "verify_item";
inline constexpr std::string_view kExportEvidence = "export_evidence";
inline constexpr std::string_view kAccessEvidence = "access_evidence";
inline constexpr std::string_view kCloseCase = "close_case";
}  // namespace event

std::span<const std::string_view> known_event_kinds() noexcept;
bool is_known_event_kind(std::string_view kind) noexcept;

// The single state-transition function shared by live operation and
// replay. Validates the event against `c` and applies it; on any Error the
// case is left unchanged.
void apply_event(Case& c, const JournalEvent& event);

}  // namespace flower
