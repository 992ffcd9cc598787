//! Mesh rendering to inline SVG, optionally coloured by an element field.

use std::fmt::Write;

use aisfem::mesh::Triangulation;

const SIZE: f64 = 420.0;
const PAD: f64 = 10.0;

/// Blue to yellow to red ramp for `t` in `[0, 1]`.
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let s = 2.0 * t;
        (40.0 + 215.0 * s, 90.0 + 140.0 * s, 200.0 - 150.0 * s)
    } else {
        let s = 2.0 * t - 1.0;
        (255.0, 230.0 - 190.0 * s, 50.0 - 20.0 * s)
    };
    format!("rgb({},{},{})", r as u8, g as u8, b as u8)
}

/// Draws `mesh` with elements filled by `log10(values)` (or white) and the
/// elements listed in `highlight` outlined in red.
pub fn mesh_svg(mesh: &Triangulation, values: Option<&[f64]>, highlight: &[usize]) -> String {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for v in mesh.vertices() {
        for d in 0..2 {
            lo[d] = lo[d].min(v[d]);
            hi[d] = hi[d].max(v[d]);
        }
    }
    let scale = (SIZE - 2.0 * PAD) / (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let map = |p: [f64; 2]| (PAD + (p[0] - lo[0]) * scale, SIZE - PAD - (p[1] - lo[1]) * scale);

    let logs: Option<Vec<f64>> = values.map(|v| v.iter().map(|x| x.max(1e-300).log10()).collect());
    let (vmin, vmax) = logs.as_ref().map_or((0.0, 1.0), |l| {
        let lo = l.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = l.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, if hi > lo { hi } else { lo + 1.0 })
    });
    // Thin strokes keep fine meshes readable.
    let stroke = if mesh.n_elements() > 4000 { 0.15 } else { 0.5 };

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    for (e, tri) in mesh.elements().iter().enumerate() {
        let pts: Vec<String> = tri
            .iter()
            .map(|&v| {
                let (x, y) = map(mesh.vertices()[v]);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let fill = logs.as_ref().map_or_else(|| "white".to_string(), |l| ramp((l[e] - vmin) / (vmax - vmin)));
        let _ = writeln!(s, r##"<polygon points="{}" fill="{fill}" stroke="#333" stroke-width="{stroke}"/>"##, pts.join(" "));
    }
    for &e in highlight {
        let pts: Vec<String> = mesh.elements()[e]
            .iter()
            .map(|&v| {
                let (x, y) = map(mesh.vertices()[v]);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(s, r#"<polygon points="{}" fill="none" stroke="red" stroke-width="1.2"/>"#, pts.join(" "));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use aisfem::mesh::l_shape;

    #[test]
    fn one_polygon_per_element_plus_highlights() {
        let mesh = l_shape().uniform_refine(2);
        let values: Vec<f64> = (1..=mesh.n_elements()).map(|i| i as f64).collect();
        let svg = mesh_svg(&mesh, Some(&values), &[0, 3]);
        assert_eq!(svg.matches("<polygon").count(), mesh.n_elements() + 2);
        assert!(svg.contains("rgb(") && svg.trim_end().ends_with("</svg>"));
        assert!(!mesh_svg(&mesh, None, &[]).contains("rgb("));
    }

    #[test]
    fn ramp_end_points() {
        assert_eq!(ramp(0.0), "rgb(40,90,200)");
        assert_eq!(ramp(1.0), "rgb(255,40,30)");
        assert_eq!(ramp(-3.0), ramp(0.0));
    }
}
