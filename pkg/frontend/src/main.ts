import { ServiceClient } from "./api.js";
import { createWizard } from "./wizard.js";

const root = document.getElementById("app");
if (root) {
  const client = new ServiceClient(window.location.origin, (url, init) => fetch(url, init));
  createWizard(root, client);
}
