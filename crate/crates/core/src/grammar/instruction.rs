use alloc::string::String;

use thiserror::Error;

/// Which task an instruction asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    ComponentId,
    ConditionInterp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("condition interpretation needs a text-region placeholder")]
pub struct MissingRegion;

const COMPONENT_ID: &str = "Please list every reaction in this image{image} in detail. \
For each reaction, include the category and unique ID of each object, along with their coordinates [x1, y1, x2, y2]. \
Categories include Structure ([Str]) and Text ([Txt]). \
Describe their roles in each reaction ([Rxn/st] to [Rxn/ed]), including Reactants ([Rct/st] to [Rct/ed]), \
Conditions ([Cnd/st] to [Cnd/ed]), and Products ([Prd/st] to [Prd/ed]). \
Note that Reactants and Products must include at least one object, while Conditions can be specified without any objects. \
Structured output format should be: [Rxn/st][Rct/st](object 1)\u{22ef}[Rct/ed][Cnd/st](object 2)\u{22ef}[Cnd/ed][Prd/st](object 3)\u{22ef}[Prd/ed][Rxn/ed],[Rxn/st]\u{22ef}. \
Only the Conditions section can be empty (i.e., [Cnd/st][Cnd/ed] without anything between).";

// The temperature role token reads [Tem], matching the role vocabulary.
const CONDITION_INTERP: &str = "For the given image{image}, what words are written in this text box{objs}. \
And please indicate the condition role[Role] of each word in: solvent[Svt], agent[Agt], temperature[Tem], time [Time] and yield[Yld]. \
Structured output format should be:'Text content'[Role],\u{22ef}.";

/// Fills the task's instruction template with the given placeholders.
pub fn build_instruction(
    task: Task,
    image_placeholder: &str,
    region_placeholder: Option<&str>,
) -> Result<String, MissingRegion> {
    match task {
        Task::ComponentId => Ok(COMPONENT_ID.replacen("{image}", image_placeholder, 1)),
        Task::ConditionInterp => {
            let region = region_placeholder.ok_or(MissingRegion)?;
            Ok(CONDITION_INTERP
                .replacen("{image}", image_placeholder, 1)
                .replacen("{objs}", region, 1))
        }
    }
}
