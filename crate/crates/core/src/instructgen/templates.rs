//! Instruction templates and seeded rendering.
//!
//! Templates mix literal text with placeholders. `<expr>`, `<question>`
//! and `<objs>` are substituted from bindings; `<image>` markers are kept
//! for downstream splicing of image features; `<bsep>` and `<msep>` are the
//! separator tokens the model is asked to emit and stay literal.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const IMAGE_MARKER: &str = "<image>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Caption,
    Vqa,
    Rec,
    Res,
    Grec,
    Gres,
    Reg,
    Nlvr,
    SpotCaption,
    #[serde(rename = "coseg")]
    CoSeg,
    #[serde(rename = "attcoseg")]
    AttCoSeg,
    Pqa,
    Bqa,
}

impl Task {
    pub const ALL: [Task; 13] = [
        Task::Caption,
        Task::Vqa,
        Task::Rec,
        Task::Res,
        Task::Grec,
        Task::Gres,
        Task::Reg,
        Task::Nlvr,
        Task::SpotCaption,
        Task::CoSeg,
        Task::AttCoSeg,
        Task::Pqa,
        Task::Bqa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Caption => "caption",
            Task::Vqa => "vqa",
            Task::Rec => "rec",
            Task::Res => "res",
            Task::Grec => "grec",
            Task::Gres => "gres",
            Task::Reg => "reg",
            Task::Nlvr => "nlvr",
            Task::SpotCaption => "spot_caption",
            Task::CoSeg => "coseg",
            Task::AttCoSeg => "attcoseg",
            Task::Pqa => "pqa",
            Task::Bqa => "bqa",
        }
    }

    /// Placeholders a template for this task may use.
    pub fn legal(self) -> &'static [Placeholder] {
        use Placeholder::*;
        match self {
            Task::Caption | Task::SpotCaption => &[Image],
            Task::Vqa | Task::Nlvr => &[Image, Question],
            Task::Rec | Task::Res => &[Image, Expr],
            Task::Grec => &[Image, Expr, Bsep],
            Task::Gres => &[Image, Expr, Msep],
            Task::Reg => &[Image, Objs],
            Task::CoSeg | Task::AttCoSeg => &[Image, Msep],
            Task::Pqa | Task::Bqa => &[Image, Objs, Question],
        }
    }

    /// Placeholders every template for this task must use.
    pub fn required(self) -> &'static [Placeholder] {
        use Placeholder::*;
        match self {
            Task::Caption | Task::SpotCaption | Task::CoSeg | Task::AttCoSeg => &[Image],
            Task::Vqa | Task::Nlvr => &[Image, Question],
            Task::Rec | Task::Res | Task::Grec | Task::Gres => &[Image, Expr],
            Task::Reg => &[Image, Objs],
            Task::Pqa | Task::Bqa => &[Image, Objs, Question],
        }
    }

    /// Whether one `<image>` marker may stand for a list of images.
    pub fn is_multi_image(self) -> bool {
        matches!(self, Task::CoSeg | Task::AttCoSeg)
    }

    /// Whether targets follow the grounding grammar.
    pub fn is_grounding(self) -> bool {
        matches!(self, Task::Rec | Task::Res | Task::Grec | Task::Gres | Task::CoSeg | Task::AttCoSeg)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        Task::ALL
            .into_iter()
            .find(|t| t.name().replace('_', "") == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown task {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placeholder {
    Image,
    Expr,
    Question,
    Objs,
    Bsep,
    Msep,
}

impl Placeholder {
    pub fn token(self) -> &'static str {
        match self {
            Placeholder::Image => "<image>",
            Placeholder::Expr => "<expr>",
            Placeholder::Question => "<question>",
            Placeholder::Objs => "<objs>",
            Placeholder::Bsep => "<bsep>",
            Placeholder::Msep => "<msep>",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "image" => Placeholder::Image,
            "expr" => Placeholder::Expr,
            "question" => Placeholder::Question,
            "objs" => Placeholder::Objs,
            "bsep" => Placeholder::Bsep,
            "msep" => Placeholder::Msep,
            _ => return None,
        })
    }

    pub fn is_bindable(self) -> bool {
        matches!(self, Placeholder::Expr | Placeholder::Question | Placeholder::Objs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Slot(Placeholder),
}

/// A validated template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub task: Task,
    pub text: String,
    pieces: Vec<Piece>,
}

impl Template {
    pub fn new(task: Task, text: &str) -> Result<Self> {
        let pieces = tokenize(text)?;
        let slots: Vec<Placeholder> = pieces
            .iter()
            .filter_map(|p| match p {
                Piece::Slot(s) => Some(*s),
                Piece::Text(_) => None,
            })
            .collect();
        for s in &slots {
            if !task.legal().contains(s) {
                return Err(Error::InvalidConfig(format!(
                    "placeholder {} not allowed in a {task} template",
                    s.token()
                )));
            }
        }
        for r in task.required() {
            if !slots.contains(r) {
                return Err(Error::InvalidConfig(format!(
                    "{task} template lacks {}: {text:?}",
                    r.token()
                )));
            }
        }
        Ok(Self { task, text: text.to_string(), pieces })
    }

    pub fn image_markers(&self) -> usize {
        self.pieces.iter().filter(|p| **p == Piece::Slot(Placeholder::Image)).count()
    }

    /// Substitutes bindings. With `images` greater than the marker count on
    /// a multi-image task, a single marker expands to `images` markers.
    pub fn render(&self, bindings: &Bindings, images: usize) -> Result<String> {
        let markers = self.image_markers();
        let expand = markers == 1 && images > 1 && self.task.is_multi_image();
        if !expand && images != markers {
            return Err(Error::InvalidConfig(format!(
                "{} template has {markers} image marker(s), got {images} image(s)",
                self.task
            )));
        }
        let mut out = String::with_capacity(self.text.len() + 64);
        for piece in &self.pieces {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(Placeholder::Image) if expand => {
                    out.push_str(&vec![IMAGE_MARKER; images].join(" "));
                }
                Piece::Slot(p) if p.is_bindable() => match bindings.get(*p) {
                    Some(v) => out.push_str(v),
                    None => {
                        return Err(Error::InvalidConfig(format!("missing binding for {}", p.token())))
                    }
                },
                Piece::Slot(p) => out.push_str(p.token()),
            }
        }
        Ok(out)
    }
}

fn tokenize(text: &str) -> Result<Vec<Piece>> {
    let mut pieces = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('<') {
        let tail = &rest[open + 1..];
        let close = tail.find('>');
        let name = close.map(|c| &tail[..c]);
        match name {
            Some(n) if !n.is_empty() && n.bytes().all(|b| b.is_ascii_lowercase()) => {
                let slot = Placeholder::from_name(n)
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown placeholder <{n}>")))?;
                if open > 0 {
                    pieces.push(Piece::Text(rest[..open].to_string()));
                }
                pieces.push(Piece::Slot(slot));
                rest = &tail[n.len() + 1..];
            }
            _ => {
                pieces.push(Piece::Text(rest[..=open].to_string()));
                rest = tail;
            }
        }
    }
    if !rest.is_empty() {
        pieces.push(Piece::Text(rest.to_string()));
    }
    // Merge adjacent text so rendering output is independent of where '<' split it.
    let mut merged: Vec<Piece> = Vec::with_capacity(pieces.len());
    for p in pieces {
        match (merged.last_mut(), p) {
            (Some(Piece::Text(a)), Piece::Text(b)) => a.push_str(&b),
            (_, p) => merged.push(p),
        }
    }
    Ok(merged)
}

/// Values for the bindable placeholders.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings(BTreeMap<Placeholder, String>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, p: Placeholder, value: impl Into<String>) -> Self {
        self.0.insert(p, value.into());
        self
    }

    pub fn expr(self, value: impl Into<String>) -> Self {
        self.with(Placeholder::Expr, value)
    }

    pub fn question(self, value: impl Into<String>) -> Self {
        self.with(Placeholder::Question, value)
    }

    pub fn objs(self, value: impl Into<String>) -> Self {
        self.with(Placeholder::Objs, value)
    }

    pub fn get(&self, p: Placeholder) -> Option<&str> {
        self.0.get(&p).map(String::as_str)
    }
}

/// Templates keyed by task.
#[derive(Debug, Clone, Default)]
pub struct TemplateRegistry {
    templates: BTreeMap<Task, Vec<Template>>,
}

impl TemplateRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The built-in set covering all tasks.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        for (task, texts) in BUILTIN {
            reg.register(*task, texts).expect("built-in templates are valid");
        }
        reg
    }

    pub fn register<S: AsRef<str>>(&mut self, task: Task, texts: &[S]) -> Result<()> {
        let parsed = texts
            .iter()
            .map(|t| Template::new(task, t.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.templates.entry(task).or_default().extend(parsed);
        Ok(())
    }

    pub fn templates(&self, task: Task) -> &[Template] {
        self.templates.get(&task).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Template picked uniformly by a generator seeded with `seed`.
    pub fn choose(&self, task: Task, seed: u64) -> Result<&Template> {
        self.choose_with(task, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn choose_with<R: Rng>(&self, task: Task, rng: &mut R) -> Result<&Template> {
        let list = self.templates(task);
        if list.is_empty() {
            return Err(Error::InvalidConfig(format!("no templates registered for {task}")));
        }
        Ok(&list[rng.gen_range(0..list.len())])
    }

    pub fn render(&self, task: Task, bindings: &Bindings, images: usize, seed: u64) -> Result<String> {
        self.choose(task, seed)?.render(bindings, images)
    }
}

// Texts follow the published examples; subscripts are written inline
// (x0 rather than x with subscript 0).
const BUILTIN: &[(Task, &[&str])] = &[
    (
        Task::Caption,
        &[
            "Can you give me a brief description of this image <image>?",
            "Give me a short description of the picture <image>.",
            "What's happening in the image <image> at a glance?",
        ],
    ),
    (
        Task::Vqa,
        &[
            "Looking at the image <image>, can you quickly answer my question: <question>.",
            "After examining the image <image>, can you provide a brief response to the following question: <question>.",
            "Considering the image <image>, please provide a straightforward answer to <question>.",
        ],
    ),
    (
        Task::Rec,
        &[
            "Locate the object described by <expr> in <image>. There's just one specific object. Provide the outcome using the [x0, y0, x1, y1] arrangement, showing the upper-left and lower-right box positions.",
            "Find the location of the item referenced in <expr> within <image>. We're referring to a single item. Output the result in [x0, y0, x1, y1] arrangement, showing the upper-left and lower-right bounding box corners.",
        ],
    ),
    (
        Task::Res,
        &[
            "Tell me where <expr> is located in <image>. There's only one object. Provide the coordinates of 32 points on the object's outline. Present the result in [x0, y0, x1, y1, ..., x31, y31] format.",
            "What is <expr>'s location within <image>? There's just one thing to consider. Share the coordinates of 32 uniform points on the object's edge. Show it in [x0, y0, x1, y1, ..., x31, y31] format.",
        ],
    ),
    (
        Task::Grec,
        &[
            "Recognize all objects indicated by <expr> in <image>. If no object is located, return an empty string. If one or more objects are located, output the bounding boxes as [x0, y0, x1, y1], indicating the top-left and bottom-right corner points. Use <bsep> to differentiate multiple bounding boxes.",
            "Pinpoint all items referenced by <expr> in <image>. If no object is detected, return an empty string. If one or more target objects are found, provide the bounding boxes as [x0, y0, x1, y1], signifying the top-left and bottom-right corner points. Use <bsep> to separate multiple bounding boxes.",
        ],
    ),
    (
        Task::Gres,
        &[
            "Find all items indicated by <expr> within <image>. If no target object is recognized, produce an empty string. If one or more target objects are identified, output the coordinates of 32 points along each object's contour. Display each object mask in [x0, y0, x1, y1, ..., x31, y31] format. Use <msep> to distinguish multiple objects.",
            "Recognize all referenced items via <expr> in <image>. If no target object is found, generate an empty string. If one or more target objects are found, present the coordinates of 32 points along each object's edge. Show each object mask in [x0, y0, x1, y1, ..., x31, y31] format. Utilize <msep> to distinguish multiple objects.",
        ],
    ),
    (
        Task::Reg,
        &[
            "Please generate a unique description for the area <objs> displayed in the image <image>.",
            "What can you tell me about the area <objs> in the image <image> that sets it apart from the rest?",
            "How does the area <objs> in <image> stand out uniquely from the rest?",
        ],
    ),
    (
        Task::Nlvr,
        &[
            "Between the left image <image> and the right image <image>, could you tell me if the answer to <question> is True or False?",
            "Reviewing both the left image <image> and the right image <image>, would you reckon <question> is True or False?",
            "Given the left image <image> and the right image <image>, can you answer my query: <question>? Respond in True or False.",
        ],
    ),
    (
        Task::SpotCaption,
        &[
            "Please provide a holistic description of the image <image> and output the position for each mentioned object in the format [x0, y0, x1, y1] representing top-right and bottom-left corners of the bounding box.",
            "Present a thorough insight into <image> and output every object's position using [x0, y0, x1, y1], representing the bounding box's top-right and bottom-left corners.",
        ],
    ),
    (
        Task::CoSeg,
        &[
            "Find the common object in the input images <image>. There's only one common object. Display each object's mask in [x0, y0, x1, y1, ..., x31, y31] format. Utilize <msep> to tell the masks apart.",
            "Locate the common thing in the input images <image>. Only one common thing will be there. Present each thing's mask in [x0, y0, x1, y1, ..., x31, y31] style. Use <msep> to differentiate the two masks.",
        ],
    ),
    (
        Task::AttCoSeg,
        &[
            "Given the input images <image>, find the two images which have a common object with matching attributes (shape, color, size, position), and segment it in both images. Show object mask in [x0, y0, x1, y1, ..., x31, y31] style in both pictures. Make use of <msep> to tell apart the two masks.",
            "Given the input images <image>, which input images have a mutual item with common attributes (shape, color, size, position)? Segment it in both images. Display object mask using [x0, y0, x1, y1, ..., x31, y31] format in both images. Apply <msep> to differentiate the two masks.",
        ],
    ),
    (
        Task::Pqa,
        &[
            "Looking at the point <objs> in the image <image>, answer the question: <question>",
            "In <image>, consider the location <objs>. <question>",
        ],
    ),
    (
        Task::Bqa,
        &[
            "Looking at the region <objs> in the image <image>, answer the question: <question>",
            "In <image>, consider the area <objs>. <question>",
        ],
    ),
];
