"""Client half of the consortium: prompts, chat-completions calls, fan-out."""
