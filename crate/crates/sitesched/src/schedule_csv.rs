//! Schedule CSV: `collaborator,site,city,level,day,shift,start,end,duration_min`,
//! one row per assignment, sorted by (collaborator, day, shift).

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sitesched_core::model::{Instance, Slot};
use sitesched_core::objective::{Assignment, Schedule};

use crate::FormatError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Row {
    collaborator: String,
    site: String,
    city: String,
    level: String,
    day: String,
    shift: String,
    start: String,
    end: String,
    duration_min: u32,
}

pub fn write_schedule<W: Write>(sch: &Schedule, inst: &Instance, out: W) -> Result<(), FormatError> {
    let mut rows: Vec<&Assignment> = sch.iter().collect();
    rows.sort_by_key(|a| (a.collaborator, a.slot.day, a.slot.shift, a.slot.site));
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "collaborator",
            "site",
            "city",
            "level",
            "day",
            "shift",
            "start",
            "end",
            "duration_min",
        ])?;
    }
    for a in rows {
        let site = &inst.sites[a.slot.site];
        let spec = inst.shift_spec(a.slot);
        w.serialize(Row {
            collaborator: inst.collaborators[a.collaborator].id.clone(),
            site: site.id.clone(),
            city: site.city.clone(),
            level: site.level.as_str().to_string(),
            day: inst.days[a.slot.day].clone(),
            shift: inst.shifts[a.slot.shift].clone(),
            start: spec.map(|s| s.start().to_string()).unwrap_or_default(),
            end: spec.map(|s| s.end().to_string()).unwrap_or_default(),
            duration_min: inst.duration(a.slot).unwrap_or(0),
        })?;
    }
    w.flush().map_err(|e| FormatError::Csv(e.to_string()))?;
    Ok(())
}

/// Reads assignments by id. Columns other than collaborator, site, day and
/// shift are informative and not checked.
pub fn read_schedule<R: Read>(input: R, inst: &Instance) -> Result<Schedule, FormatError> {
    let mut r = csv::Reader::from_reader(input);
    let mut sch = Schedule::new();
    for (i, row) in r.deserialize::<Row>().enumerate() {
        let row = row?;
        let line = i + 2;
        let find = |what: &str, pos: Option<usize>, id: &str| {
            pos.ok_or_else(|| FormatError::Schema {
                path: format!("line {line}.{what}"),
                reason: format!("unknown {what} {id:?}"),
            })
        };
        let c = find("collaborator", inst.collaborator_index(&row.collaborator), &row.collaborator)?;
        let s = find("site", inst.site_index(&row.site), &row.site)?;
        let d = find("day", inst.days.iter().position(|x| *x == row.day), &row.day)?;
        let j = find("shift", inst.shifts.iter().position(|x| *x == row.shift), &row.shift)?;
        sch.insert(Assignment::new(c, Slot::new(s, d, j)));
    }
    Ok(sch)
}

pub fn save_schedule(sch: &Schedule, inst: &Instance, path: &Path) -> Result<(), FormatError> {
    let f = std::fs::File::create(path).map_err(|e| FormatError::io(path, e))?;
    write_schedule(sch, inst, f)
}

pub fn load_schedule(path: &Path, inst: &Instance) -> Result<Schedule, FormatError> {
    let f = std::fs::File::open(path).map_err(|e| FormatError::io(path, e))?;
    read_schedule(f, inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sitesched_core::instances::build_real_case;

    #[test]
    fn empty_schedule_is_header_only() {
        let mut buf = Vec::new();
        write_schedule(&Schedule::new(), &build_real_case(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "collaborator,site,city,level,day,shift,start,end,duration_min\n");
    }

    #[test]
    fn one_assignment_two_lines_and_round_trip() {
        let inst = build_real_case();
        let sch: Schedule = [Assignment::new(3, Slot::new(1, 2, 0))].into_iter().collect();
        let mut buf = Vec::new();
        write_schedule(&sch, &inst, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), 2);
        assert_eq!(read_schedule(&buf[..], &inst).unwrap(), sch);
    }
}
