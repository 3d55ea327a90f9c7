//! Named run configurations shipped with the binary.
//!
//! Each recipe has a full variant and a desk-scale variant with fewer nodes
//! and orders; the desk files state their looser tolerances at the top.

pub const NAMES: &[&str] = &["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

const FILES: &[(&str, &str, &str)] = &[
    ("fig2", include_str!("../recipes/fig2.toml"), include_str!("../recipes/fig2-desk.toml")),
    ("fig3", include_str!("../recipes/fig3.toml"), include_str!("../recipes/fig3-desk.toml")),
    ("fig4", include_str!("../recipes/fig4.toml"), include_str!("../recipes/fig4-desk.toml")),
    ("fig5", include_str!("../recipes/fig5.toml"), include_str!("../recipes/fig5-desk.toml")),
    ("fig6", include_str!("../recipes/fig6.toml"), include_str!("../recipes/fig6-desk.toml")),
    ("fig7", include_str!("../recipes/fig7.toml"), include_str!("../recipes/fig7-desk.toml")),
];

/// TOML text of a recipe.
pub fn recipe(name: &str, desk: bool) -> Option<&'static str> {
    FILES.iter().find(|(n, _, _)| *n == name).map(|&(_, full, small)| if desk { small } else { full })
}
