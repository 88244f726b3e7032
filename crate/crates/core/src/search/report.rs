use std::io::{self, Write};

use super::{SearchOutcome, UndeterminedReason};

fn braces(names: &[&str]) -> String {
    format!("{{{}}}", names.join(", "))
}

/// Human-readable summary: verdict, local structure, adjustment sets, effect and
/// test counts.
pub fn write_text_report(out: &mut impl Write, o: &SearchOutcome) -> io::Result<()> {
    let c = &o.context;
    writeln!(out, "treatment: {}", o.name(c.w))?;
    writeln!(out, "outcome:   {}", o.name(c.y))?;
    writeln!(out, "verdict:   {}", o.verdict.as_str())?;
    match o.undetermined {
        Some(UndeterminedReason::NoCoso) => writeln!(out, "reason:    no COSO candidate")?,
        Some(UndeterminedReason::SearchExhausted) => {
            writeln!(out, "reason:    no conclusive test up to the size cap")?
        }
        None => {}
    }
    if let Some(w) = &o.witness {
        writeln!(out, "witness:   {}", o.describe_witness(w))?;
    }
    writeln!(out)?;
    writeln!(out, "Adj(W):  {}", braces(&o.names_of(&c.adj_w)))?;
    writeln!(out, "Adj(Y):  {}", braces(&o.names_of(&c.adj_y)))?;
    writeln!(out, "Q:       {}", braces(&o.names_of(&c.q_removed)))?;
    writeln!(out, "Adj_R:   {}", braces(&o.names_of(&c.adj_r)))?;
    writeln!(out, "Omega:   {}", braces(&o.names_of(&c.omega)))?;

    if !o.psi.is_empty() {
        writeln!(out)?;
        writeln!(out, "adjustment sets:")?;
        for e in &o.psi {
            let set = braces(&o.names_of(&e.z));
            match e.effect {
                Some(v) => writeln!(out, "  {set:<30} level {} via {}  effect {v:.6}", e.level, o.name(e.coso))?,
                None => writeln!(out, "  {set:<30} level {} via {}", e.level, o.name(e.coso))?,
            }
            for n in &e.notes {
                writeln!(out, "    note: {n}")?;
            }
        }
        if let Some(ace) = o.ace() {
            writeln!(out, "ACE:     {ace:.6}")?;
        }
    }
    if o.witnesses.len() > 1 {
        writeln!(out)?;
        writeln!(out, "all witnesses:")?;
        for w in &o.witnesses {
            writeln!(out, "  {}", o.describe_witness(w))?;
        }
    }
    writeln!(out)?;
    writeln!(
        out,
        "CI tests: {} ({} in adjacency learning), levels explored: {}",
        o.stats.ci_tests, o.stats.discovery_tests, o.stats.levels_explored
    )?;
    Ok(())
}

/// One row per adjustment set: `set,size,level,coso,effect`. Members are joined
/// with `;`; a missing effect is an empty field.
pub fn write_csv_report(out: &mut impl Write, o: &SearchOutcome) -> io::Result<()> {
    writeln!(out, "set,size,level,coso,effect")?;
    for e in &o.psi {
        let effect = e.effect.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            o.names_of(&e.z).join(";"),
            e.z.len(),
            e.level,
            o.name(e.coso),
            effect
        )?;
    }
    Ok(())
}
