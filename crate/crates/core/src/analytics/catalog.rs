//! The study questionnaire: every item the service records and exports.

use super::likert::Instrument;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogItem {
    pub instrument: Instrument,
    pub item_id: &'static str,
    /// Grouping used in the analysis report.
    pub dimension: &'static str,
    pub question: &'static str,
    pub reversed: bool,
}

const fn item(
    instrument: Instrument,
    item_id: &'static str,
    dimension: &'static str,
    question: &'static str,
) -> CatalogItem {
    CatalogItem { instrument, item_id, dimension, question, reversed: false }
}

const fn rev(mut c: CatalogItem) -> CatalogItem {
    c.reversed = true;
    c
}

use Instrument::*;

const COMPETENCE: &str = "Perceived Competence";
const TLX: &str = "Task Load Index";
const EFFECTIVENESS: &str = "Perceived Learning Effectiveness";
const EXPERIENCE: &str = "Perceived Learning Experience";
const UX: &str = "User Experience";
const TRUST: &str = "Trust";

/// Items in export order. UEQ-S items follow their scoring order.
pub const ITEMS: [CatalogItem; 45] = [
    item(ImiCompetence, "pretty_good", COMPETENCE, "I think I am pretty good at this activity."),
    item(ImiCompetence, "compared_to_others", COMPETENCE, "I think I did pretty well at this activity, compared to other students."),
    item(ImiCompetence, "felt_competent", COMPETENCE, "After working at this activity for a while, I felt pretty competent."),
    item(ImiCompetence, "satisfied", COMPETENCE, "I am satisfied with my performance at this task."),
    item(ImiCompetence, "skilled", COMPETENCE, "I was pretty skilled at this activity."),
    rev(item(ImiCompetence, "could_not_do_well", COMPETENCE, "This was an activity that I couldn't do very well.")),
    item(Tlx, "mental", TLX, "How mentally demanding was the task?"),
    item(Tlx, "physical", TLX, "How physically demanding was the task?"),
    item(Tlx, "temporal", TLX, "How hurried or rushed was the pace of the task?"),
    item(Tlx, "performance", TLX, "How successful were you in accomplishing what you were asked to do?"),
    item(Tlx, "effort", TLX, "How hard did you have to work to accomplish your level of performance?"),
    item(Tlx, "frustration", TLX, "How insecure, discouraged, irritated, stressed, and annoyed were you?"),
    item(LearningEffectiveness, "understand", EFFECTIVENESS, "I was able to understand the topic well through these videos."),
    item(LearningEffectiveness, "retain", EFFECTIVENESS, "The short-form video format helped me retain key information."),
    item(LearningEffectiveness, "focus", EFFECTIVENESS, "This format helped me focus better than traditional video lectures."),
    item(LearningEffectiveness, "explain", EFFECTIVENESS, "I feel more confident explaining this topic to others now."),
    item(LearningExperience, "remember", EXPERIENCE, "The videos helped me remember key points better than a full lecture."),
    item(LearningExperience, "breakdown", EXPERIENCE, "The format helped break down the topic into manageable parts."),
    item(LearningExperience, "prefer_future", EXPERIENCE, "I would prefer to learn future topics using this format."),
    item(LearningExperience, "revisit", EXPERIENCE, "This format made it easier to revisit important concepts."),
    item(LearningExperience, "engaged", EXPERIENCE, "I felt more engaged with this format compared to traditional lectures."),
    item(UeqS, "obstructive_supportive", UX, "obstructive / supportive"),
    item(UeqS, "complicated_easy", UX, "complicated / easy"),
    item(UeqS, "inefficient_efficient", UX, "inefficient / efficient"),
    item(UeqS, "confusing_clear", UX, "confusing / clear"),
    item(UeqS, "boring_exciting", UX, "boring / exciting"),
    item(UeqS, "not_interesting_interesting", UX, "not interesting / interesting"),
    item(UeqS, "conventional_inventive", UX, "conventional / inventive"),
    item(UeqS, "usual_leading_edge", UX, "usual / leading edge"),
    rev(item(Trust, "deceptive", TRUST, "The system is deceptive.")),
    rev(item(Trust, "underhanded", TRUST, "The system behaves in an underhanded manner.")),
    rev(item(Trust, "suspicious", TRUST, "I am suspicious of the system's intent, action, or outputs.")),
    rev(item(Trust, "wary", TRUST, "I am wary of the system.")),
    rev(item(Trust, "harmful", TRUST, "The system's actions will have a harmful or injurious outcome.")),
    item(Trust, "confident", TRUST, "I am confident in the system."),
    item(Trust, "security", TRUST, "The system provides security."),
    item(Trust, "integrity", TRUST, "The system has integrity."),
    item(Trust, "dependable", TRUST, "The system is dependable."),
    item(Trust, "reliable", TRUST, "The system is reliable."),
    item(Trust, "can_trust", TRUST, "I can trust the system."),
    item(Trust, "familiar", TRUST, "I am familiar with the system."),
    rev(item(Trust, "skeptical", TRUST, "I am skeptical of the AI-generated content.")),
    item(Trust, "reels_trustworthy", TRUST, "The AI-generated reels are trustworthy."),
    item(Trust, "reels_accurate", TRUST, "The AI-generated reels are accurate."),
    item(Trust, "future_use", TRUST, "I would use the system for future learning."),
];

/// `<instrument>.<item_id>`, the export column name of an item.
pub fn column_name(c: &CatalogItem) -> alloc::string::String {
    alloc::format!("{}.{}", c.instrument.as_str(), c.item_id)
}

pub fn find(instrument: Instrument, item_id: &str) -> Option<&'static CatalogItem> {
    ITEMS.iter().find(|c| c.instrument == instrument && c.item_id == item_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::UEQ_S_ITEMS;
    use alloc::vec::Vec;

    #[test]
    fn ueq_items_follow_scoring_order() {
        let ueq: Vec<&str> = ITEMS.iter().filter(|c| c.instrument == UeqS).map(|c| c.item_id).collect();
        assert_eq!(ueq, UEQ_S_ITEMS);
    }

    #[test]
    fn ids_are_unique_and_trust_has_sixteen_items() {
        for (i, a) in ITEMS.iter().enumerate() {
            assert!(ITEMS[i + 1..].iter().all(|b| column_name(a) != column_name(b)));
        }
        assert_eq!(ITEMS.iter().filter(|c| c.instrument == Trust).count(), 16);
        assert_eq!(find(Tlx, "effort").unwrap().dimension, TLX);
    }
}
