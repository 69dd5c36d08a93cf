/// Resolution at which cost maps are built and regularized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Resolution {
    /// Half-resolution cost maps, full-resolution depth output.
    #[default]
    Full,
    /// Quarter-resolution cost maps and depth output.
    Quarter,
}

impl Resolution {
    /// Feature-map size relative to the input image.
    pub fn feature_scale(self) -> f64 {
        match self {
            Resolution::Full => 0.5,
            Resolution::Quarter => 0.25,
        }
    }

    /// Output-map size relative to the input image.
    pub fn output_scale(self) -> f64 {
        match self {
            Resolution::Full => 1.0,
            Resolution::Quarter => 0.25,
        }
    }

    /// Input extents must be multiples of this.
    pub fn size_multiple(self) -> usize {
        match self {
            Resolution::Full => 16,
            Resolution::Quarter => 32,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Resolution::Full => "full",
            Resolution::Quarter => "quarter",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full" => Some(Resolution::Full),
            "quarter" => Some(Resolution::Quarter),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NetConfig {
    pub resolution: Resolution,
}
