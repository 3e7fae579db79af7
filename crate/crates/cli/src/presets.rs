//! Named parameter sets for the published figures, stored as config text so
//! they read exactly like a user file.

use crate::config::{ConfigError, RawConfig};

pub const NAMES: &[&str] = &[
    "fig2",
    "fig2-conventional",
    "fig3a",
    "fig3a-conventional",
    "fig3b",
    "fig3b-conventional",
    "fig3c",
    "fig3c-conventional",
    "fig4",
    "fig4-conventional",
    "fig5b",
    "fig5c",
    "fig6",
    "fig6-90k",
    "fig6-110k",
    "fig6-120k",
    "fig7",
    "fig8",
    "fig9a",
    "fig9b",
];

/// Magnon platform: ω_m = 15.6 GHz (angular), g_m = 2π × 1 MHz.
fn magnon_base(kelvin: f64, g_f_over_g_m: f64, tau_seconds: f64) -> String {
    format!(
        "omega_m_rad_s = 1.56e10\nT_kelvin = {kelvin:?}\n\n[si]\ng_m = 6283185.307179586\n\
         g_f_over_g_m = {g_f_over_g_m:?}\ntau = {tau_seconds:?}\n"
    )
}

/// ω_m τ = 700 and ω_m τ = 220 at ω_m = 1.56e10 rad/s.
const TAU_700: f64 = 4.487179487179487e-8;
const TAU_220: f64 = 1.4102564102564102e-8;

/// Coefficient plots: g_m/ω_m = 0.0004, g_f/g_m = 50, ω_m τ = 700.
const COEFFICIENT_PLOT: &str = r#"
omega_m_rad_s = 1.56e10
T_kelvin = 10.0

[dimensionless]
g_m = 4.0e-4
g_f_over_g_m = 50.0
tau = 700.0
"#;

fn segments(variant: &str, steps: usize) -> String {
    format!("\n[[segments]]\nvariant = \"{variant}\"\nsteps = {steps}\n")
}

fn coefficients(variant: &str, powers: &str) -> String {
    format!("\n[coefficients]\nvariant = \"{variant}\"\nn_max = 2500\npowers = {powers}\n")
}

fn text(name: &str) -> Option<String> {
    let magnon = |t: f64, variant: &str, steps: usize| {
        magnon_base(t, 30.0, TAU_700) + &segments(variant, steps)
    };
    let fig6 = |t: f64| magnon_base(t, 50.0, TAU_220) + &segments("driven", 300);
    let coeff = |variant: &str| {
        COEFFICIENT_PLOT.to_string()
            + &coefficients(variant, "[1, 10, 20]")
            + &segments(variant, 10)
    };
    let detuned = |variant: &str| {
        COEFFICIENT_PLOT.to_string()
            + "delta_e_over_g_m = 10.0\n"
            + &coefficients(variant, "[1]")
            + &segments(variant, 1)
    };
    Some(match name {
        "fig2" => coeff("driven"),
        "fig2-conventional" => coeff("conventional"),
        "fig3a" => magnon(0.1, "driven", 80),
        "fig3a-conventional" => magnon(0.1, "conventional", 80),
        "fig3b" => magnon(1.0, "driven", 80),
        "fig3b-conventional" => magnon(1.0, "conventional", 80),
        "fig3c" => magnon(2.2, "driven", 80),
        "fig3c-conventional" => magnon(2.2, "conventional", 80),
        "fig4" => magnon(10.0, "driven", 300),
        "fig4-conventional" => magnon(10.0, "conventional", 300),
        "fig5b" => "histogram = true\n".to_string() + &magnon(10.0, "conventional", 60),
        "fig5c" => "histogram = true\n".to_string() + &magnon(10.0, "driven", 60),
        "fig6" => fig6(100.0),
        "fig6-90k" => fig6(90.0),
        "fig6-110k" => fig6(110.0),
        "fig6-120k" => fig6(120.0),
        // Drive for 30 measurements, then switch the drive off.
        "fig7" => magnon(10.0, "driven", 30) + &segments("conventional", 30),
        "fig8" => {
            magnon(10.0, "driven", 50)
                + "\n[sweep]\naxis = \"g_f_over_g_m\"\nrange = [0.0, 100.0, 1.0]\n"
        }
        "fig9a" => detuned("driven-detuned"),
        "fig9b" => detuned("conventional-detuned"),
        _ => return None,
    })
}

pub fn preset(name: &str) -> Result<RawConfig, ConfigError> {
    let text = text(name).ok_or_else(|| ConfigError::UnknownPreset { name: name.into() })?;
    let mut raw = RawConfig::from_toml(&text).expect("preset text is valid");
    raw.preset = Some(name.to_string());
    Ok(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, ThermalInput};
    use meascool::Variant;

    #[test]
    fn every_preset_resolves() {
        for name in NAMES {
            let c = resolve(&preset(name).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(c.preset.as_deref(), Some(*name));
        }
    }

    #[test]
    fn unknown_preset_is_an_error() {
        assert!(matches!(
            preset("fig10"),
            Err(ConfigError::UnknownPreset { .. })
        ));
    }

    #[test]
    fn fig4_expands_to_magnon_parameters() {
        let c = resolve(&preset("fig4").unwrap()).unwrap();
        let p = c.params;
        assert_eq!(p.omega_m(), 1.56e10);
        assert!((p.g_m_si() / (2.0 * std::f64::consts::PI * 1e6) - 1.0).abs() < 1e-15);
        assert!((p.g_f_over_g_m() - 30.0).abs() < 1e-12);
        assert!((p.tau() - 700.0).abs() < 1e-12);
        assert_eq!(c.thermal, ThermalInput::Temperature(10.0));
        assert_eq!(c.segments.len(), 1);
        assert_eq!(c.segments[0].variant, Variant::Driven);
    }

    #[test]
    fn fig6_overrides_drive_and_interval() {
        let c = resolve(&preset("fig6-120k").unwrap()).unwrap();
        assert!((c.params.g_f_over_g_m() - 50.0).abs() < 1e-12);
        assert!((c.params.tau() - 220.0).abs() < 1e-12);
        assert_eq!(c.thermal, ThermalInput::Temperature(120.0));
    }
}
