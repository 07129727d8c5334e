//! Classes twisted by a line: pairs `(m, s)` of a class and a nonvanishing
//! section, with `(m, u·s) ~ (<u>·m, s)`.

use crate::error::{Error, Result};
use crate::fields::FieldElem;
use crate::mw::MwClass;
use crate::quad_forms::FormClass;

#[derive(Clone, Debug)]
pub struct TwistedClass {
    cls: MwClass,
    tag: String,
    section: FieldElem,
}

impl TwistedClass {
    pub fn new(cls: MwClass, tag: &str, section: FieldElem) -> Result<TwistedClass> {
        if cls.ctx().is_zero(&section) {
            return Err(Error::InvalidTwist("section must not vanish".into()));
        }
        Ok(TwistedClass { cls, tag: tag.to_string(), section })
    }

    /// The untwisted class `m ⊗ 1`.
    pub fn trivial(cls: MwClass) -> TwistedClass {
        let one = cls.ctx().one();
        TwistedClass { cls, tag: "trivial".into(), section: one }
    }

    pub fn class(&self) -> &MwClass {
        &self.cls
    }
    pub fn tag(&self) -> &str {
        &self.tag
    }
    pub fn section(&self) -> &FieldElem {
        &self.section
    }

    /// Express the class against `new_section`, where the current section
    /// equals `unit · new_section`: `(m, u·s') = (<u>·m, s')`.
    pub fn rebase(&self, new_section: &FieldElem, unit: &FieldElem) -> Result<TwistedClass> {
        let ctx = self.cls.ctx();
        if ctx.is_zero(unit) {
            return Err(Error::ZeroHasNoClass);
        }
        if ctx.mul(unit, new_section)? != self.section {
            return Err(Error::InvalidTwist("unit does not relate the sections".into()));
        }
        let cls = self.cls.gw_scale(&FormClass::diag1(ctx, unit.clone()))?;
        Ok(TwistedClass { cls, tag: self.tag.clone(), section: new_section.clone() })
    }

    /// Underlying class expressed against the given section.
    pub fn class_at(&self, section: &FieldElem) -> Result<MwClass> {
        let ctx = self.cls.ctx();
        let u = ctx.div(&self.section, section)?;
        Ok(self.rebase(section, &u)?.cls)
    }

    pub fn equals(&self, o: &TwistedClass) -> Result<bool> {
        if self.tag != o.tag {
            return Err(Error::InvalidTwist(format!("tags differ: {} vs {}", self.tag, o.tag)));
        }
        self.class_at(&o.section)?.equals(&o.cls)
    }

    pub fn add(&self, o: &TwistedClass) -> Result<TwistedClass> {
        if self.tag != o.tag {
            return Err(Error::InvalidTwist(format!("tags differ: {} vs {}", self.tag, o.tag)));
        }
        let cls = self.cls.add(&o.class_at(&self.section)?)?;
        Ok(TwistedClass { cls, tag: self.tag.clone(), section: self.section.clone() })
    }

    pub fn display(&self) -> String {
        format!("{} ⊗ {}[{}]", self.cls.display(), self.tag, self.cls.ctx().format(&self.section))
    }
}
