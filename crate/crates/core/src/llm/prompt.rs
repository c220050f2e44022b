use alloc::format;
use alloc::string::String;

use super::{LlmError, PromptSpec, Role};
use crate::domain::ParamKind;

fn role_instructions(role: Role) -> &'static str {
    match role {
        Role::GoalInterpretation => {
            "You convert a task instruction for a robot into formal goal conditions. \
             The goal is a conjunction of the conditions below, applied to the listed objects. \
             State only the conditions that must hold when the task is done."
        }
        Role::FailureResolution => {
            "A robot action failed. From the error message, find the conditions that must hold \
             before the action can succeed. They will be added as preconditions of the failing \
             action, so name conditions on the world, not actions."
        }
        Role::ParameterResolution => {
            "A robot action has a parameter without a value. Suggest a value that suits the \
             objects involved in the task."
        }
    }
}

/// The strict grammar the answer must follow.
pub fn output_format(spec: &PromptSpec) -> String {
    let answer = match (spec.role, spec.param_request.as_ref().map(|r| &r.kind)) {
        (Role::ParameterResolution, Some(ParamKind::Numeric { unit })) => {
            format!("ANSWER: <number> {unit}")
        }
        (Role::ParameterResolution, Some(ParamKind::Categorical { .. })) => {
            String::from("ANSWER: <one word from the allowed values>")
        }
        (Role::ParameterResolution, _) => String::from("ANSWER: <value>"),
        _ => String::from("ANSWER: <condition> & <condition> & ..."),
    };
    let mut out = format!("The first line of the reply must be\n{answer}\n");
    if spec.role != Role::ParameterResolution {
        out.push_str(
            "A condition is predicate(arg, arg) using a name from the condition list and \
             objects from the object list. Prefix ~ to negate it. any_object stands for every \
             object.\n",
        );
    }
    out.push_str(
        "Give the answer first and nothing before it. Do not think step by step before \
         answering. After the answer you may add one section starting with REASONING:.",
    );
    out
}

/// Renders the prompt text. Identical specs give identical text.
pub fn build_prompt(spec: &PromptSpec) -> Result<String, LlmError> {
    spec.validate()?;
    let mut out = String::new();
    out.push_str(role_instructions(spec.role));
    out.push_str("\n\nConditions:\n");
    for c in &spec.condition_catalog {
        out.push_str(&format!("- {}: {}\n", c.signature, c.description));
    }
    out.push_str("\nObjects:\n");
    for o in &spec.objects {
        out.push_str(&format!("- {} ({})\n", o.name, o.category));
    }
    out.push_str(
        "Only the listed objects can be used. If the instruction mentions something that is \
         not listed, use the most similar listed object.\n",
    );
    out.push_str("\nScene:\n");
    if spec.scene_description.is_empty() {
        out.push_str("Nothing is known about the scene.\n");
    } else {
        out.push_str(&spec.scene_description);
        out.push('\n');
    }
    if !spec.examples.is_empty() {
        out.push_str("\nExamples:\n");
        for e in &spec.examples {
            out.push_str(&format!("Instruction: {}\nANSWER: {}\n", e.instruction, e.answer));
        }
    }
    if let (Some(action), Some(msg)) = (&spec.failing_action, &spec.error_message) {
        out.push_str(&format!("\nFailing action: {action}\nError message: {msg}\n"));
    }
    if let Some(req) = &spec.param_request {
        out.push_str(&format!("\nAction: {}\nParameter: {}\n", req.action, req.slot));
        match &req.kind {
            ParamKind::Numeric { unit } => out.push_str(&format!("Unit: {unit}\n")),
            ParamKind::Categorical { choices } => {
                out.push_str(&format!("Allowed values: {}\n", choices.join(", ")))
            }
            ParamKind::Object(_) => {}
        }
    }
    out.push_str(&format!("\nTask instruction: {}\n", spec.instruction));
    out.push_str("\nOutput format:\n");
    out.push_str(&output_format(spec));
    out.push('\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::fixtures::{cube_domain, state};
    use crate::domain::GroundAction;
    use crate::domain::BindingValue;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn sections_in_order() {
        let d = cube_domain(&["blue_cube"]);
        let s = state(&["on(blue_cube, table)"]);
        let grasp = GroundAction::new(
            "grasp",
            vec![("obj".into(), Some(BindingValue::Symbol("blue_cube".into())))],
        );
        let spec = PromptSpec::failure(&d, &s, "stack", &[], &grasp, "No collision free path found");
        let text = build_prompt(&spec).unwrap();
        let order = [
            "A robot action failed",
            "Conditions:",
            "Objects:",
            "Scene:",
            "Failing action: grasp(blue_cube)",
            "Error message: No collision free path found",
            "Task instruction: stack",
            "Output format:",
        ];
        let pos: Vec<usize> = order.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{text}");
        assert_eq!(text, build_prompt(&spec).unwrap());
    }

    #[test]
    fn failure_without_message_is_invalid() {
        let d = cube_domain(&["blue_cube"]);
        let mut spec = PromptSpec::goal(&d, &state(&[]), "x", &[]);
        spec.role = Role::FailureResolution;
        assert!(matches!(build_prompt(&spec), Err(LlmError::InvalidSpec(_))));
    }
}
