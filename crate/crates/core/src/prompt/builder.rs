use super::format::{format_checkin_line, format_datetime};
use super::{
    AddressBook, PromptError, PromptRecord, SerializationConfig, CURRENT_HEADER, HISTORY_HEADER,
};
use crate::ingest::{CheckIn, Trajectory};
use crate::sid::SidRegistry;

/// Rendered check-in lines end with a space before the newline.
const LINE_END: &str = " \n";

#[derive(Debug, Clone, Copy)]
pub struct PromptInputs<'a> {
    pub registry: &'a SidRegistry,
    pub addresses: &'a AddressBook,
    pub config: &'a SerializationConfig,
}

impl PromptInputs<'_> {
    fn line(&self, checkins: &[CheckIn], at: usize) -> Result<String, PromptError> {
        let c = &checkins[at];
        let sid = self
            .registry
            .sid_of(&c.poi_id)
            .ok_or_else(|| PromptError::UnregisteredPoi(c.poi_id.clone()))?;
        let prev = at.checked_sub(1).map(|i| &checkins[i]);
        let address = self.addresses.get(&c.poi_id).map(String::as_str);
        Ok(format_checkin_line(
            c,
            &sid.render(),
            address,
            prev,
            self.config,
        ))
    }
}

/// Keeps the most recent `budget` check-ins: whole history trajectories from
/// newest to oldest, then the tail of the oldest one that partially fits.
/// Returns `(trajectory, first kept index)` in chronological order.
fn truncate_history<'t>(
    history: &[&'t Trajectory],
    mut budget: usize,
) -> Vec<(&'t Trajectory, usize)> {
    let mut kept = Vec::new();
    for t in history.iter().rev() {
        if budget == 0 {
            break;
        }
        let take = t.len().min(budget);
        budget -= take;
        kept.push((*t, t.len() - take));
    }
    kept.reverse();
    kept
}

/// Builds a prompt from history trajectories, the current context and the
/// target check-in, rendering at most `limit` check-ins overall.
pub fn build_prompt(
    prompt_id: &str,
    history: &[&Trajectory],
    context: &[CheckIn],
    target: &CheckIn,
    limit: usize,
    inputs: &PromptInputs<'_>,
) -> Result<PromptRecord, PromptError> {
    if context.is_empty() {
        return Err(PromptError::EmptyContext);
    }
    let ground_truth_sid = inputs
        .registry
        .sid_of(&target.poi_id)
        .cloned()
        .ok_or_else(|| PromptError::UnregisteredPoi(target.poi_id.clone()))?;

    let limit = limit.max(1);
    let context_start = context.len().saturating_sub(limit);
    let mut history: Vec<&Trajectory> = history.iter().copied().filter(|t| !t.is_empty()).collect();
    history.sort_by_key(|t| (t.start_local(), t.trajectory_id.clone()));
    let kept = truncate_history(&history, limit - (context.len() - context_start));

    let mut text = String::new();
    if let Some(instruction) = &inputs.config.instruction {
        text.push_str(instruction);
        text.push('\n');
    }
    text.push_str(HISTORY_HEADER);
    text.push('\n');
    for (n, (traj, start)) in kept.iter().enumerate() {
        text.push_str(&format!("User Traj#{}:\n", n + 1));
        for at in *start..traj.len() {
            text.push_str(&inputs.line(&traj.checkins, at)?);
            text.push_str(LINE_END);
        }
    }
    text.push_str(CURRENT_HEADER);
    text.push('\n');
    for at in context_start..context.len() {
        text.push_str(&inputs.line(context, at)?);
        text.push_str(LINE_END);
    }
    text.push_str(&format!(
        "At {}, user will visit ",
        format_datetime(&target.local_time())
    ));

    Ok(PromptRecord {
        prompt_id: prompt_id.to_string(),
        user_id: target.user_id.clone(),
        prompt_text: text,
        ground_truth_sid,
        ground_truth_point: target.location(),
        target_local_time: target.local_time(),
        tz_offset_minutes: target.tz_offset_minutes,
    })
}

/// Evaluation prompt with the evaluation history limit.
pub fn build_eval_prompt(
    prompt_id: &str,
    history: &[&Trajectory],
    context: &[CheckIn],
    target: &CheckIn,
    inputs: &PromptInputs<'_>,
) -> Result<PromptRecord, PromptError> {
    build_prompt(
        prompt_id,
        history,
        context,
        target,
        inputs.config.max_history_checkins_eval,
        inputs,
    )
}
