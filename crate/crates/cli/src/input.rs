use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};
use slac::model::ValueDoc;
use slac::{templates, Instance, Template, Value, VarId};

use crate::Inputs;

pub struct Loaded {
    pub instance: Instance,
    pub template_sha256: String,
    pub instance_sha256: String,
}

pub fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A path wins over a bundled name of the same spelling.
pub fn load_template(spec: &str) -> Result<(Arc<Template>, String)> {
    let path = Path::new(spec);
    if path.exists() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let t = Template::from_json(&text).with_context(|| format!("parsing template {}", path.display()))?;
        return Ok((Arc::new(t), sha256(text.as_bytes())));
    }
    match templates::by_name(spec) {
        Some(t) => {
            let digest = sha256(t.to_json().as_bytes());
            Ok((Arc::new(t), digest))
        }
        None => bail!("no template file or bundled template named `{spec}`"),
    }
}

pub fn load_instance(template: &Arc<Template>, path: &Path) -> Result<(Instance, String)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = Instance::from_json(Arc::clone(template), &text)
        .with_context(|| format!("parsing instance {}", path.display()))?;
    Ok((inst, sha256(text.as_bytes())))
}

pub fn load(inputs: &Inputs) -> Result<Loaded> {
    let (template, template_sha256) = load_template(&inputs.template)?;
    let (instance, instance_sha256) = load_instance(&template, &inputs.instance)?;
    Ok(Loaded {
        instance,
        template_sha256,
        instance_sha256,
    })
}

pub fn resolve_seed(instance: &Instance, var: &str, val: &str) -> Result<(VarId, Value)> {
    let Some(x) = instance.variable_id(var) else {
        bail!("unknown variable `{var}`");
    };
    let doc = match val.parse::<u64>() {
        Ok(i) if instance.template().value_index(val).is_none() => ValueDoc::Index(i),
        _ => ValueDoc::Name(val.to_string()),
    };
    let Some(a) = doc.resolve(instance.template()) else {
        bail!("unknown value `{val}`");
    };
    Ok((x, a))
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
