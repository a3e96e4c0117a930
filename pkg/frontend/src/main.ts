import { ApiClient } from "./api.js";
import { QueryConsole } from "./console.js";
import { renderError, renderHistory, renderResults } from "./render.js";
import { MODES, isMode } from "./types.js";

function require<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function start(): void {
  const form = require<HTMLFormElement>("query-form");
  const input = require<HTMLInputElement>("question");
  const modeSelect = require<HTMLSelectElement>("mode");
  const statusLine = require<HTMLElement>("status");
  const errorBox = require<HTMLElement>("error");
  const resultsBox = require<HTMLElement>("results");
  const historyBox = require<HTMLElement>("history");

  for (const mode of MODES) {
    const option = document.createElement("option");
    option.value = mode;
    option.textContent = mode;
    modeSelect.appendChild(option);
  }

  const api = new ApiClient("");
  const console_ = new QueryConsole(api);

  console_.subscribe((state) => {
    if (input.value !== state.question) input.value = state.question;
    modeSelect.value = state.mode;
    statusLine.textContent = state.loading ? "querying..." : "";
    renderError(errorBox, state.error);
    if (state.response) renderResults(resultsBox, state.response);
    renderHistory(historyBox, state.history, (entry) => {
      void console_.submit(entry.question, entry.mode);
    });
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    console_.setQuestion(input.value);
    void console_.submit();
  });
  input.addEventListener("input", () => console_.setQuestion(input.value));
  modeSelect.addEventListener("change", () => {
    if (isMode(modeSelect.value)) void console_.toggleMode(modeSelect.value);
  });

  void api
    .health()
    .then((h) => {
      statusLine.textContent = `${h.passages} passages indexed`;
    })
    .catch(() => {
      statusLine.textContent = "service not reachable";
    });
}

document.addEventListener("DOMContentLoaded", start);
