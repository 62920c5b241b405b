//! Grammar rules, template extraction and the command parser.

pub mod parse;
pub mod rule;
pub mod template;

pub use parse::{command_words, parse_command, ParseOutcome};
pub use rule::{Condition, Effect, GrammarRule, Target};
pub use template::{
    action_space_size, candidate_count, enumerate_candidates, extract_templates, extract_vocabulary, fill_template,
    free_form_space_size, template_upper_bound, ActionCandidate, ActionSpaceSize, ArityError, Overflow, PairMode,
    Template, Vocabulary,
};
