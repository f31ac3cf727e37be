use crawlerlab_core::gsp::fold_data;

use super::{write_json, Context};

pub fn run(ctx: &Context) -> anyhow::Result<()> {
    let g = &ctx.cfg.groups;
    ctx.flags(g)?;
    write_json(&ctx.path("fold.json"), &fold_data(g)?)
}
