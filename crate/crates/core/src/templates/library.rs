//! The built-in library and directory loading. A library directory holds
//! one document per file: `.tpl` query templates, `.flt` filter templates
//! and `.gen` generators; each id equals its file stem.

use std::path::Path;

use super::{
    parse_filter_template, parse_generator, parse_template, read_document, FilterTemplate, GeneratorSpec,
    QueryTemplate, TemplateError,
};

const TEMPLATES: &[(&str, &str)] = &[
    ("above_average_instances", include_str!("../../library/templates/above_average_instances.tpl")),
    ("above_cohort_average", include_str!("../../library/templates/above_cohort_average.tpl")),
    ("average_child_value_per_parent", include_str!("../../library/templates/average_child_value_per_parent.tpl")),
    ("average_per_category", include_str!("../../library/templates/average_per_category.tpl")),
    ("average_value", include_str!("../../library/templates/average_value.tpl")),
    ("children_of_parents_in_category", include_str!("../../library/templates/children_of_parents_in_category.tpl")),
    ("cohort_count_compare", include_str!("../../library/templates/cohort_count_compare.tpl")),
    ("cohort_side_by_side", include_str!("../../library/templates/cohort_side_by_side.tpl")),
    ("count_after_date", include_str!("../../library/templates/count_after_date.tpl")),
    ("count_all", include_str!("../../library/templates/count_all.tpl")),
    ("count_children_per_parent", include_str!("../../library/templates/count_children_per_parent.tpl")),
    ("count_per_category", include_str!("../../library/templates/count_per_category.tpl")),
    ("earliest_date", include_str!("../../library/templates/earliest_date.tpl")),
    ("extreme_instance", include_str!("../../library/templates/extreme_instance.tpl")),
    ("instance_value_compare", include_str!("../../library/templates/instance_value_compare.tpl")),
    ("list_names", include_str!("../../library/templates/list_names.tpl")),
    ("matches_maximum", include_str!("../../library/templates/matches_maximum.tpl")),
    ("maximum_value", include_str!("../../library/templates/maximum_value.tpl")),
    ("most_common_category", include_str!("../../library/templates/most_common_category.tpl")),
    ("most_recent_instance", include_str!("../../library/templates/most_recent_instance.tpl")),
    ("names_above_threshold", include_str!("../../library/templates/names_above_threshold.tpl")),
    ("names_in_category", include_str!("../../library/templates/names_in_category.tpl")),
    ("names_in_date_range", include_str!("../../library/templates/names_in_date_range.tpl")),
    ("occurred_after", include_str!("../../library/templates/occurred_after.tpl")),
    ("occurred_before", include_str!("../../library/templates/occurred_before.tpl")),
    ("parent_cohort_average_compare", include_str!("../../library/templates/parent_cohort_average_compare.tpl")),
    ("parent_with_most_children", include_str!("../../library/templates/parent_with_most_children.tpl")),
    (
        "rank_parent_categories_by_average",
        include_str!("../../library/templates/rank_parent_categories_by_average.tpl"),
    ),
    ("related_to_matching", include_str!("../../library/templates/related_to_matching.tpl")),
    ("top_five_with_values", include_str!("../../library/templates/top_five_with_values.tpl")),
    ("total_in_parent_category", include_str!("../../library/templates/total_in_parent_category.tpl")),
    ("value_of_instance", include_str!("../../library/templates/value_of_instance.tpl")),
];

const FILTERS: &[(&str, &str)] = &[
    ("above_average", include_str!("../../library/filters/above_average.flt")),
    ("at_max", include_str!("../../library/filters/at_max.flt")),
    ("at_min", include_str!("../../library/filters/at_min.flt")),
    ("below_average", include_str!("../../library/filters/below_average.flt")),
    ("has_related_row", include_str!("../../library/filters/has_related_row.flt")),
    ("in_top_k", include_str!("../../library/filters/in_top_k.flt")),
];

const GENERATORS: &[(&str, &str)] = &[
    ("distant_attributes", include_str!("../../library/generators/distant_attributes.gen")),
    ("entity_attributes", include_str!("../../library/generators/entity_attributes.gen")),
    ("mixed_paths", include_str!("../../library/generators/mixed_paths.gen")),
    ("related_attributes", include_str!("../../library/generators/related_attributes.gen")),
    ("related_metrics", include_str!("../../library/generators/related_metrics.gen")),
];

#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Template(QueryTemplate),
    Filter(FilterTemplate),
    Generator(GeneratorSpec),
}

impl Document {
    pub fn id(&self) -> &str {
        match self {
            Document::Template(t) => &t.id,
            Document::Filter(f) => &f.id,
            Document::Generator(g) => &g.id,
        }
    }
}

/// Parse a document of the kind named by a file extension.
pub fn parse_document(text: &str, extension: &str) -> Result<Document, TemplateError> {
    match extension {
        "tpl" => parse_template(text).map(Document::Template),
        "flt" => parse_filter_template(text).map(Document::Filter),
        "gen" => parse_generator(text).map(Document::Generator),
        other => Err(TemplateError::Invalid(format!("unknown document kind '.{other}'"))),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Library {
    pub templates: Vec<QueryTemplate>,
    pub filters: Vec<FilterTemplate>,
    pub generators: Vec<GeneratorSpec>,
}

impl Library {
    /// The shipped templates, filter templates and generators.
    pub fn builtin() -> Library {
        Library {
            templates: builtin_templates(),
            filters: builtin_filter_templates(),
            generators: builtin_generators(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty() && self.generators.is_empty()
    }
}

fn parse_all<T>(docs: &[(&str, &str)], parse: fn(&str) -> Result<T, TemplateError>) -> Vec<T> {
    docs.iter().map(|(name, text)| parse(text).unwrap_or_else(|e| panic!("built-in document {name}: {e}"))).collect()
}

pub fn builtin_templates() -> Vec<QueryTemplate> {
    parse_all(TEMPLATES, parse_template)
}

pub fn builtin_filter_templates() -> Vec<FilterTemplate> {
    parse_all(FILTERS, parse_filter_template)
}

pub fn builtin_generators() -> Vec<GeneratorSpec> {
    parse_all(GENERATORS, parse_generator)
}

/// Load every document under `dir` (recursively), in path order.
pub fn load_library(dir: &Path) -> Result<Library, TemplateError> {
    let mut paths = Vec::new();
    collect(dir, &mut paths)?;
    paths.sort();
    let mut lib = Library::default();
    for p in paths {
        match read_document(&p)? {
            Document::Template(t) => lib.templates.push(t),
            Document::Filter(f) => lib.filters.push(f),
            Document::Generator(g) => lib.generators.push(g),
        }
    }
    Ok(lib)
}

fn collect(dir: &Path, out: &mut Vec<std::path::PathBuf>) -> Result<(), TemplateError> {
    let io = |e: std::io::Error| TemplateError::Io { path: dir.display().to_string(), message: e.to_string() };
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_dir() {
            collect(&path, out)?;
        } else if matches!(path.extension().and_then(|e| e.to_str()), Some("tpl" | "flt" | "gen")) {
            out.push(path);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse() {
        let lib = Library::builtin();
        assert_eq!(lib.templates.len(), 32);
        assert_eq!(lib.filters.len(), 6);
        assert_eq!(lib.generators.len(), 5);
        for (name, _) in TEMPLATES {
            assert!(lib.templates.iter().any(|t| t.id == *name), "{name}");
        }
        for t in &lib.templates {
            assert!((2..=4).contains(&t.question_templates.len()), "{}", t.id);
        }
    }

    #[test]
    fn loads_the_library_directory() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("library");
        assert_eq!(load_library(&dir).unwrap(), Library::builtin());
    }
}
