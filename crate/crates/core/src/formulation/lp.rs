use std::fmt::Write;

use super::{BilpModel, RowKey};
use crate::domain::Attendance;

fn push_term(line: &mut String, first: bool, coefficient: Attendance, name: &str) {
    let sign = if coefficient.is_negative() { "-" } else { "+" };
    let magnitude = Attendance::from_milli(coefficient.milli().abs());
    match (first, coefficient.is_negative()) {
        (true, false) => write!(line, " {magnitude} {name}"),
        (true, true) => write!(line, " -{magnitude} {name}"),
        (false, _) => write!(line, " {sign} {magnitude} {name}"),
    }
    .expect("writing to a String");
}

fn row_name(model: &BilpModel, key: &RowKey) -> String {
    match key {
        RowKey::Screen(s) => format!("screen_{s}"),
        RowKey::Stagger(k) if model.clusters().len() <= 1 => {
            format!("stagger_f{}_c{}", k.film, k.config)
        }
        RowKey::Stagger(k) => {
            let ordinal = model
                .clusters()
                .iter()
                .position(|c| c == &k.cluster)
                .expect("row cluster is a model cluster");
            format!("stagger_k{}_f{}_c{}", ordinal + 1, k.film, k.config)
        }
    }
}

/// Writes the model in CPLEX LP text format. Output depends only on the
/// model, byte for byte.
pub fn export_lp_text(model: &BilpModel) -> String {
    let names: Vec<String> = model.variables().iter().map(|v| v.lp_name()).collect();
    let mut out = String::new();
    out.push_str("\\ Film scheduling with showtime staggering\n");
    out.push_str("\\ Variables X_s<screen>_f<film>_c<config>, ordered by screen, film, config\n");
    writeln!(
        out,
        "\\ {} screens, {} configurations, {} variables",
        model.screen_count(),
        model.configuration_count(),
        model.variable_count()
    )
    .unwrap();
    if model.clusters().len() > 1 {
        for (i, c) in model.clusters().iter().enumerate() {
            writeln!(out, "\\ cluster k{}: {}", i + 1, c).unwrap();
        }
    }

    out.push_str("Maximize\n");
    let mut objective = String::from(" attendance:");
    if names.is_empty() {
        objective.push_str(" 0");
    }
    for (i, (name, c)) in names.iter().zip(model.objective()).enumerate() {
        push_term(&mut objective, i == 0, *c, name);
    }
    out.push_str(&objective);
    out.push('\n');

    out.push_str("Subject To\n");
    let rows = model
        .equality_rows()
        .iter()
        .map(|r| (r, "="))
        .chain(model.inequality_rows().iter().map(|r| (r, "<=")));
    for (row, sense) in rows {
        write!(out, " {}:", row_name(model, &row.key)).unwrap();
        if row.variables.is_empty() {
            out.push_str(" 0");
        }
        for (i, &v) in row.variables.iter().enumerate() {
            if i > 0 {
                out.push_str(" +");
            }
            write!(out, " {}", names[v]).unwrap();
        }
        writeln!(out, " {sense} 1").unwrap();
    }

    out.push_str("Binary\n");
    for name in &names {
        writeln!(out, " {name}").unwrap();
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::super::test_support::matrix_model;
    use super::super::{build_joint_model, build_model};
    use super::*;
    use crate::domain::load_instance;

    fn section<'a>(text: &'a str, start: &str, end: &str) -> Vec<&'a str> {
        text.lines()
            .skip_while(|l| *l != start)
            .skip(1)
            .take_while(|l| *l != end)
            .collect()
    }

    #[test]
    fn crossover_objective_line() {
        let multi = load_instance(crate::CROSSOVER_INSTANCE).unwrap();
        let text = export_lp_text(&build_model(multi.single().unwrap()));
        let objective = section(&text, "Maximize", "Subject To");
        assert_eq!(objective.len(), 1);
        let line = objective[0];
        assert!(line.starts_with(" attendance: 226 X_s1_f1_c1 + 245 X_s1_f1_c2 + 232 X_s1_f2_c1"));
        assert_eq!(line.matches("X_s").count(), 144);
        assert!(line.ends_with("+ 267 X_s9_f5_c4"));
        assert_eq!(section(&text, "Binary", "End").len(), 144);
        let rows = section(&text, "Subject To", "Binary");
        assert_eq!(rows.iter().filter(|r| r.ends_with(" = 1")).count(), 9);
        assert_eq!(rows.iter().filter(|r| r.ends_with(" <= 1")).count(), 16);
        assert!(rows[0].starts_with(" screen_1: X_s1_f1_c1 + X_s1_f1_c2"));
        assert!(rows[9].starts_with(" stagger_f1_c1: X_s1_f1_c1 + X_s2_f1_c1"));
    }

    #[test]
    fn zero_coefficient_and_small_models() {
        let text = export_lp_text(&matrix_model(&[vec![0]]));
        assert!(text.contains("\n attendance: 0 X_s1_f1_c1\n"));

        let text = export_lp_text(&matrix_model(&[vec![1, 1, 1], vec![1, 1, 1]]));
        let objective = section(&text, "Maximize", "Subject To");
        assert_eq!(objective[0].matches("X_s").count(), 6);
        let rows = section(&text, "Subject To", "Binary");
        assert_eq!(rows.iter().filter(|r| r.ends_with(" = 1")).count(), 2);
        assert_eq!(rows.iter().filter(|r| r.ends_with(" <= 1")).count(), 3);
    }

    #[test]
    fn negative_and_fractional_terms() {
        let m = matrix_model(&[vec![1, 2]]).map_objective(|c| {
            if c == Attendance::from_units(1) {
                Attendance::from_milli(-1500)
            } else {
                Attendance::from_milli(2250)
            }
        });
        let text = export_lp_text(&m);
        assert!(
            text.contains(" attendance: -1.5 X_s1_f1_c1 + 2.25 X_s1_f1_c2\n"),
            "{text}"
        );
    }

    #[test]
    fn deterministic_and_cluster_scoped_names() {
        let doc = crate::synth::synth_document(&crate::synth::SynthParams {
            screens: 4,
            films: 2,
            clusters: 2,
            seed: 11,
            ..Default::default()
        })
        .unwrap();
        let multi = doc.to_instance().unwrap();
        let a = export_lp_text(&build_joint_model(&multi));
        let b = export_lp_text(&build_joint_model(&multi));
        assert_eq!(a, b);
        assert!(a.contains(" stagger_k1_f1_c1:"));
        assert!(a.contains(" stagger_k2_f1_c1:"));
        assert!(a.contains("\\ cluster k2: "));
    }
}
