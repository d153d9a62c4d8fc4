//! Instance JSON.
//!
//! ```json
//! {"sites":[{"id":"CE-K","city":"Cerisano","level":"Kindergarten"}],
//!  "collaborators":[{"id":"CG","gender":"F","contract":"FT",
//!                    "binding_sites":[],"preferred_sites":[]}],
//!  "days":["Mon"], "shifts":["T1","T2"],
//!  "timetable":{"CE-K":{"Mon":{"T1":"07:30-14:42","T2":null}}},
//!  "params":{"h_ft_min":2160,"h_pt_min":1080,"break_threshold_min":432,"break_min":30},
//!  "weights":[0.5,0.3,0.2]}
//! ```
//!
//! A missing or null timetable cell is an inactive slot. Missing `params`,
//! `weights`, `days` or `shifts` fall back to defaults with a warning.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sitesched_core::model::{
    Collaborator, Contract, Gender, Instance, Interpretation, Level, Params, ShiftSpec, Site,
    Timetable, Weights, DEFAULT_DAYS, DEFAULT_SHIFTS,
};

use crate::FormatError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteRecord {
    id: String,
    city: String,
    level: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CollaboratorRecord {
    id: String,
    gender: String,
    contract: String,
    #[serde(default)]
    binding_sites: Vec<String>,
    #[serde(default)]
    preferred_sites: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRecord {
    h_ft_min: Option<u32>,
    h_pt_min: Option<u32>,
    break_threshold_min: Option<u32>,
    break_min: Option<u32>,
}

type Cells = BTreeMap<String, BTreeMap<String, BTreeMap<String, Option<String>>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceRecord {
    sites: Vec<SiteRecord>,
    collaborators: Vec<CollaboratorRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    days: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shifts: Option<Vec<String>>,
    #[serde(default)]
    timetable: Cells,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<ParamsRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "is_default")]
    interpretation: Interpretation,
}

fn is_default(i: &Interpretation) -> bool {
    *i == Interpretation::default()
}

fn level_from(text: &str) -> Option<Level> {
    Level::ALL
        .into_iter()
        .find(|l| l.as_str().eq_ignore_ascii_case(text) || &l.as_str()[..1] == text)
}

fn gender_from(text: &str) -> Option<Gender> {
    match text.to_ascii_lowercase().as_str() {
        "f" | "female" => Some(Gender::Female),
        "m" | "male" => Some(Gender::Male),
        _ => None,
    }
}

fn contract_from(text: &str) -> Option<Contract> {
    match text.to_ascii_lowercase().as_str() {
        "ft" | "full_time" | "fulltime" => Some(Contract::FullTime),
        "pt" | "part_time" | "parttime" => Some(Contract::PartTime),
        _ => None,
    }
}

fn schema(path: impl Into<String>, reason: impl Into<String>) -> FormatError {
    FormatError::Schema {
        path: path.into(),
        reason: reason.into(),
    }
}

/// Parses instance JSON. Returns the instance and any warnings about
/// defaulted sections.
pub fn parse_instance(text: &str) -> Result<(Instance, Vec<String>), FormatError> {
    let rec: InstanceRecord = serde_json::from_str(text).map_err(|e| schema("$", e.to_string()))?;
    let mut warnings = Vec::new();

    let mut sites = Vec::with_capacity(rec.sites.len());
    for (i, s) in rec.sites.iter().enumerate() {
        let level = level_from(&s.level)
            .ok_or_else(|| schema(format!("sites[{i}].level"), format!("unknown level {:?}", s.level)))?;
        if sites.iter().any(|x: &Site| x.id == s.id) {
            return Err(schema(format!("sites[{i}].id"), format!("duplicate id {:?}", s.id)));
        }
        sites.push(Site::new(&s.id, &s.city, level));
    }
    let site_of = |path: String, id: &str| {
        sites
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| schema(path, format!("unknown site {id:?}")))
    };

    let mut collaborators = Vec::with_capacity(rec.collaborators.len());
    for (i, c) in rec.collaborators.iter().enumerate() {
        let gender = gender_from(&c.gender)
            .ok_or_else(|| schema(format!("collaborators[{i}].gender"), format!("unknown gender {:?}", c.gender)))?;
        let contract = contract_from(&c.contract).ok_or_else(|| {
            schema(format!("collaborators[{i}].contract"), format!("unknown contract {:?}", c.contract))
        })?;
        let mut collab = Collaborator::new(&c.id, gender, contract);
        for (k, id) in c.binding_sites.iter().enumerate() {
            collab.binding_sites.insert(site_of(format!("collaborators[{i}].binding_sites[{k}]"), id)?);
        }
        for (k, id) in c.preferred_sites.iter().enumerate() {
            collab
                .preferred_sites
                .insert(site_of(format!("collaborators[{i}].preferred_sites[{k}]"), id)?);
        }
        collaborators.push(collab);
    }

    let days = rec.days.clone().unwrap_or_else(|| {
        warnings.push("missing `days`, using Mon..Fri".to_string());
        DEFAULT_DAYS.iter().map(|d| d.to_string()).collect()
    });
    let shifts = rec.shifts.clone().unwrap_or_else(|| {
        warnings.push("missing `shifts`, using T1,T2".to_string());
        DEFAULT_SHIFTS.iter().map(|j| j.to_string()).collect()
    });

    let mut timetable = Timetable::empty(sites.len(), days.len(), shifts.len());
    for (site_id, by_day) in &rec.timetable {
        let s = site_of(format!("timetable.{site_id}"), site_id)?;
        for (day, by_shift) in by_day {
            let d = days
                .iter()
                .position(|x| x == day)
                .ok_or_else(|| schema(format!("timetable.{site_id}.{day}"), "unknown day"))?;
            for (shift, cell) in by_shift {
                let path = format!("timetable.{site_id}.{day}.{shift}");
                let j = shifts
                    .iter()
                    .position(|x| x == shift)
                    .ok_or_else(|| schema(path.clone(), "unknown shift"))?;
                if let Some(text) = cell {
                    let spec: ShiftSpec = text
                        .parse()
                        .map_err(|e| schema(path.clone(), format!("{text:?}: {e}")))?;
                    timetable.set(s, d, j, Some(spec));
                }
            }
        }
    }

    let defaults = Params::default();
    let params = match rec.params {
        Some(p) => Params {
            h_ft_minutes: p.h_ft_min.unwrap_or(defaults.h_ft_minutes),
            h_pt_minutes: p.h_pt_min.unwrap_or(defaults.h_pt_minutes),
            break_threshold_minutes: p.break_threshold_min.unwrap_or(defaults.break_threshold_minutes),
            break_minutes: p.break_min.unwrap_or(defaults.break_minutes),
        },
        None => {
            warnings.push("missing `params`, using defaults".to_string());
            defaults
        }
    };
    let weights = match rec.weights {
        Some(w) => {
            let w = Weights(w);
            if !w.is_valid() {
                return Err(schema("weights", "weights must be finite, nonnegative and not all zero"));
            }
            w
        }
        None => {
            warnings.push("missing `weights`, using 0.5/0.3/0.2".to_string());
            Weights::default()
        }
    };

    let inst = Instance {
        sites,
        collaborators,
        days,
        shifts,
        timetable,
        params,
        weights,
        interpretation: rec.interpretation,
    };
    Ok((inst, warnings))
}

/// Canonical JSON: sites and collaborators in index order, maps sorted.
pub fn instance_to_json(inst: &Instance) -> String {
    let ids = |set: &std::collections::BTreeSet<usize>| -> Vec<String> {
        set.iter().map(|&s| inst.sites[s].id.clone()).collect()
    };
    let mut timetable: Cells = BTreeMap::new();
    for (s, site) in inst.sites.iter().enumerate() {
        let by_day = timetable.entry(site.id.clone()).or_default();
        for (d, day) in inst.days.iter().enumerate() {
            let by_shift = by_day.entry(day.clone()).or_default();
            for (j, shift) in inst.shifts.iter().enumerate() {
                let cell = inst.timetable.get(s, d, j).map(ShiftSpec::to_string);
                by_shift.insert(shift.clone(), cell);
            }
        }
    }
    let rec = InstanceRecord {
        sites: inst
            .sites
            .iter()
            .map(|s| SiteRecord {
                id: s.id.clone(),
                city: s.city.clone(),
                level: s.level.as_str().to_string(),
            })
            .collect(),
        collaborators: inst
            .collaborators
            .iter()
            .map(|c| CollaboratorRecord {
                id: c.id.clone(),
                gender: match c.gender {
                    Gender::Female => "F",
                    Gender::Male => "M",
                }
                .to_string(),
                contract: match c.contract {
                    Contract::FullTime => "FT",
                    Contract::PartTime => "PT",
                }
                .to_string(),
                binding_sites: ids(&c.binding_sites),
                preferred_sites: ids(&c.preferred_sites),
            })
            .collect(),
        days: Some(inst.days.clone()),
        shifts: Some(inst.shifts.clone()),
        timetable,
        params: Some(ParamsRecord {
            h_ft_min: Some(inst.params.h_ft_minutes),
            h_pt_min: Some(inst.params.h_pt_minutes),
            break_threshold_min: Some(inst.params.break_threshold_minutes),
            break_min: Some(inst.params.break_minutes),
        }),
        weights: Some(inst.weights.0),
        interpretation: inst.interpretation,
    };
    let mut out = serde_json::to_string_pretty(&rec).expect("instance records always serialize");
    out.push('\n');
    out
}

pub fn load_instance(path: &Path) -> Result<(Instance, Vec<String>), FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    parse_instance(&text)
}

pub fn save_instance(inst: &Instance, path: &Path) -> Result<(), FormatError> {
    fs::write(path, instance_to_json(inst)).map_err(|e| FormatError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sitesched_core::instances::build_real_case;

    #[test]
    fn real_case_round_trip() {
        let inst = build_real_case();
        let text = instance_to_json(&inst);
        let (back, warnings) = parse_instance(&text).unwrap();
        assert_eq!(back, inst);
        assert!(warnings.is_empty());
        assert_eq!(instance_to_json(&back), text);
    }

    #[test]
    fn missing_params_defaults_with_warning() {
        let text = r#"{"sites":[{"id":"a","city":"X","level":"Primary"}],
            "collaborators":[{"id":"c","gender":"M","contract":"FT"}],
            "days":["Mon"],"shifts":["T1"],
            "timetable":{"a":{"Mon":{"T1":"08:00-14:00"}}},
            "weights":[1,1,1]}"#;
        let (inst, warnings) = parse_instance(text).unwrap();
        assert_eq!(inst.params, Params::default());
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("params"));
    }

    #[test]
    fn malformed_time_names_the_cell() {
        let text = r#"{"sites":[{"id":"a","city":"X","level":"Primary"}],
            "collaborators":[],"days":["Mon"],"shifts":["T1"],
            "timetable":{"a":{"Mon":{"T1":"8h-14h"}}}}"#;
        let err = parse_instance(text).unwrap_err().to_string();
        assert!(err.contains("timetable.a.Mon.T1"), "{err}");
    }

    #[test]
    fn unknown_site_reference() {
        let text = r#"{"sites":[],"collaborators":[{"id":"c","gender":"F","contract":"PT",
            "binding_sites":["zz"]}]}"#;
        let err = parse_instance(text).unwrap_err().to_string();
        assert!(err.contains("collaborators[0].binding_sites[0]"), "{err}");
    }
}
