use crate::closedform::{distribution, tvd_dense};
use crate::model::{init_uniform, param_count, ModelSpec, OperatorSet, Parameters};
use crate::{Error, Result};

/// Identity mapping from `sqRBM_{n,m}` over `W_h` to `RBM_{n,|W_h|·m}`: channel `c` of
/// hidden unit `j` becomes RBM hidden unit `j·|W_h| + c`, visible fields copied.
pub fn map_to_rbm(spec: &ModelSpec, params: &Parameters) -> Result<(ModelSpec, Parameters)> {
    if !spec.family().is_restricted() {
        return Err(Error::UnsupportedFamily {
            op: "RBM mapping",
            family: spec.family(),
        });
    }
    params.validate(spec)?;
    let (n, m) = (spec.n(), spec.m());
    let k = spec.hidden_ops().len();
    let rbm = ModelSpec::rbm(n, k * m)?;
    let mut out = Parameters::zeros(&rbm);
    out.visible.clone_from(&params.visible);
    let target = &mut out.channels[0];
    for (c, channel) in params.channels.iter().enumerate() {
        for j in 0..m {
            let u = j * k + c;
            target.bias[u] = channel.bias[j];
            for i in 0..n {
                target.weights[i * k * m + u] = channel.weights[i * m + j];
            }
        }
    }
    Ok((rbm, out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappingReport {
    pub n: usize,
    pub m: usize,
    pub ops: OperatorSet,
    pub scale: f64,
    pub seed: u64,
    pub rbm_hidden: usize,
    pub sq_param_count: usize,
    pub rbm_param_count: usize,
    pub tvd: f64,
}

/// Draws `sqRBM_{n,m}` parameters uniform in `[−scale, scale]`, maps them to the RBM
/// and reports the TVD between the two output distributions.
pub fn mapping_check(
    n: usize,
    m: usize,
    ops: OperatorSet,
    scale: f64,
    seed: u64,
) -> Result<MappingReport> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::InvalidConfig(alloc::format!(
            "scale must be a non-negative number, got {scale}"
        )));
    }
    let spec = ModelSpec::restricted(n, m, ops)?;
    let params = if scale == 0.0 {
        Parameters::zeros(&spec)
    } else {
        init_uniform(&spec, seed, -scale, scale)?
    };
    let (rbm, mapped) = map_to_rbm(&spec, &params)?;
    let p = distribution(&spec, &params)?;
    let r = distribution(&rbm, &mapped)?;
    Ok(MappingReport {
        n,
        m,
        ops,
        scale,
        seed,
        rbm_hidden: rbm.m(),
        sq_param_count: param_count(&spec)?,
        rbm_param_count: param_count(&rbm)?,
        tvd: tvd_dense(p.probs(), r.probs()),
    })
}
