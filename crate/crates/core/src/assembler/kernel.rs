use serde::{Deserialize, Serialize};

use super::KernelConfig;

/// Reserved label on the kernel's terminating self-jump.
pub const EXIT_LABEL: &str = "__exit";

/// Kernel prefix + user source + kernel suffix, with the line counts needed to
/// tell kernel lines from user lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinedSource {
    pub text: String,
    pub prefix_lines: usize,
    pub user_lines: usize,
    pub suffix_lines: usize,
}

impl CombinedSource {
    /// Source with no kernel lines at all.
    pub fn plain(text: &str) -> Self {
        Self { text: text.to_string(), prefix_lines: 0, user_lines: text.lines().count(), suffix_lines: 0 }
    }

    pub fn is_kernel_line(&self, line: usize) -> bool {
        line <= self.prefix_lines || line > self.prefix_lines + self.user_lines
    }

    /// Maps a combined-source line to the line in the user's file.
    pub fn user_line(&self, line: usize) -> Option<usize> {
        (!self.is_kernel_line(line)).then(|| line - self.prefix_lines)
    }

    pub fn lines(&self) -> impl Iterator<Item = &str> {
        self.text.lines()
    }
}

/// Surrounds the user program with stack/global pointer setup in front and the
/// exit loop behind.
pub fn wrap_with_kernel(user_source: &str, config: &KernelConfig) -> CombinedSource {
    let prefix = [format!("li sp, 0x{:08x}", config.stack_top), format!("li gp, 0x{:08x}", config.data_base)];
    let suffix = [".text".to_string(), format!("{EXIT_LABEL}:"), format!("j {EXIT_LABEL}")];
    let user: Vec<&str> = user_source.lines().collect();
    let text = prefix
        .iter()
        .map(String::as_str)
        .chain(user.iter().copied())
        .chain(suffix.iter().map(String::as_str))
        .collect::<Vec<_>>()
        .join("\n");
    CombinedSource { text, prefix_lines: prefix.len(), user_lines: user.len(), suffix_lines: suffix.len() }
}
