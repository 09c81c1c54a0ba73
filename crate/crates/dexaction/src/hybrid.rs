use crate::error::ActionError;

/// Total hybrid slot count: front half left arm, second half right arm.
pub const HYBRID_SLOTS: usize = 16;

/// First slot of the right arm's half.
pub const RIGHT_SLOT_BASE: usize = 8;

/// Which arms an embodiment actuates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arms {
    LeftOnly,
    RightOnly,
    Dual,
}

/// Physical robot configuration: arm selection plus per-arm DoF.
/// 7 = 6-DoF arm + gripper, 8 = 7-DoF arm + gripper.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Embodiment {
    arms: Arms,
    dof_per_arm: usize,
}

impl Embodiment {
    pub fn new(arms: Arms, dof_per_arm: usize) -> Result<Self, ActionError> {
        if dof_per_arm != 7 && dof_per_arm != 8 {
            return Err(ActionError::BadDof(format!(
                "dof_per_arm is {dof_per_arm}, must be 7 or 8"
            )));
        }
        Ok(Embodiment { arms, dof_per_arm })
    }

    pub fn arms(&self) -> Arms {
        self.arms
    }

    pub fn dof_per_arm(&self) -> usize {
        self.dof_per_arm
    }

    pub fn has_left(&self) -> bool {
        matches!(self.arms, Arms::LeftOnly | Arms::Dual)
    }

    pub fn has_right(&self) -> bool {
        matches!(self.arms, Arms::RightOnly | Arms::Dual)
    }
}

/// The fixed 16-slot action representation. Slots an embodiment does not
/// supervise are masked false and hold exactly 0.0; that invariant is
/// enforced on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridTokens {
    values: [f64; HYBRID_SLOTS],
    mask: [bool; HYBRID_SLOTS],
}

impl HybridTokens {
    pub fn new(values: [f64; HYBRID_SLOTS], mask: [bool; HYBRID_SLOTS]) -> Result<Self, ActionError> {
        for (i, (&v, &m)) in values.iter().zip(&mask).enumerate() {
            if !m && v != 0.0 {
                return Err(ActionError::MaskMismatch(format!(
                    "slot {i} is masked out but holds {v}"
                )));
            }
        }
        Ok(HybridTokens { values, mask })
    }

    pub fn values(&self) -> &[f64; HYBRID_SLOTS] {
        &self.values
    }

    pub fn mask(&self) -> &[bool; HYBRID_SLOTS] {
        &self.mask
    }
}

/// The supervision mask for an embodiment: true on the slots its arms
/// occupy, false everywhere else. Single-arm embodiments leave the other
/// half entirely unsupervised; 7-DoF arms leave slot 7/15 padded false.
///
/// This is the single source of truth for slot occupancy — `pack_hybrid`
/// derives its mask from here.
pub fn loss_mask_for(emb: Embodiment) -> [bool; HYBRID_SLOTS] {
    let mut mask = [false; HYBRID_SLOTS];
    if emb.has_left() {
        for slot in mask.iter_mut().take(emb.dof_per_arm()) {
            *slot = true;
        }
    }
    if emb.has_right() {
        for slot in mask
            .iter_mut()
            .skip(RIGHT_SLOT_BASE)
            .take(emb.dof_per_arm())
        {
            *slot = true;
        }
    }
    mask
}

/// Place per-arm action vectors into the 16-slot hybrid layout: left in
/// slots `[0, dof)`, right in `[8, 8+dof)`, everything else 0.0/false.
pub fn pack_hybrid(
    left: Option<&[f64]>,
    right: Option<&[f64]>,
    emb: Embodiment,
) -> Result<HybridTokens, ActionError> {
    if left.is_some() != emb.has_left() || right.is_some() != emb.has_right() {
        return Err(ActionError::ArmMismatch(format!(
            "{:?} embodiment given left={}, right={}",
            emb.arms(),
            left.is_some(),
            right.is_some()
        )));
    }
    for (name, arm) in [("left", left), ("right", right)] {
        if let Some(v) = arm {
            if v.len() != emb.dof_per_arm() {
                return Err(ActionError::BadDof(format!(
                    "{name} arm vector has {} values, embodiment dof is {}",
                    v.len(),
                    emb.dof_per_arm()
                )));
            }
        }
    }

    let mut values = [0.0; HYBRID_SLOTS];
    if let Some(l) = left {
        values[..l.len()].copy_from_slice(l);
    }
    if let Some(r) = right {
        values[RIGHT_SLOT_BASE..RIGHT_SLOT_BASE + r.len()].copy_from_slice(r);
    }
    let mask = loss_mask_for(emb);
    // a masked-out slot can only hold 0.0 here by construction, but go
    // through the validating constructor anyway
    HybridTokens::new(values, mask)
}

/// Exact inverse of [`pack_hybrid`]: recover the per-arm vectors. The
/// token mask must equal the embodiment's loss mask.
pub fn unpack_hybrid(
    tokens: &HybridTokens,
    emb: Embodiment,
) -> Result<(Option<Vec<f64>>, Option<Vec<f64>>), ActionError> {
    let expected = loss_mask_for(emb);
    if tokens.mask() != &expected {
        return Err(ActionError::MaskMismatch(format!(
            "token mask {:?} does not match {:?} with dof {}",
            tokens.mask(),
            emb.arms(),
            emb.dof_per_arm()
        )));
    }
    let dof = emb.dof_per_arm();
    let left = emb
        .has_left()
        .then(|| tokens.values()[..dof].to_vec());
    let right = emb
        .has_right()
        .then(|| tokens.values()[RIGHT_SLOT_BASE..RIGHT_SLOT_BASE + dof].to_vec());
    Ok((left, right))
}
