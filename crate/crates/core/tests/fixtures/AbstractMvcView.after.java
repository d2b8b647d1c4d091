/*
 * Copyright 2004-2012 the original author or authors.
 */
package org.springframework.webflow.mvc.view;

import java.io.IOException;
import java.util.HashMap;
import java.util.Map;
import java.util.Set;

import org.apache.commons.logging.Log;
import org.apache.commons.logging.LogFactory;
import org.springframework.binding.convert.ConversionService;
import org.springframework.binding.expression.EvaluationException;
import org.springframework.binding.expression.Expression;
import org.springframework.binding.expression.ExpressionParser;
import org.springframework.binding.expression.ParserContext;
import org.springframework.binding.expression.beanwrapper.BeanWrapperExpressionParser;
import org.springframework.binding.expression.support.FluentParserContext;
import org.springframework.binding.expression.support.StaticExpression;
import org.springframework.binding.mapping.MappingResults;
import org.springframework.binding.mapping.impl.DefaultMapper;
import org.springframework.binding.mapping.impl.DefaultMapping;
import org.springframework.validation.Validator;
import org.springframework.webflow.core.collection.ParameterMap;
import org.springframework.webflow.execution.RequestContext;
import org.springframework.webflow.execution.View;

/**
 * Base view implementation for the Spring Web MVC Servlet and Spring Web MVC Portlet frameworks.
 *
 * @author Keith Donald
 */
public abstract class AbstractMvcView implements View {

    private static final Log logger = LogFactory.getLog(AbstractMvcView.class);

    private org.springframework.web.servlet.View view;
    private RequestContext requestContext;
    private ExpressionParser expressionParser;
    private final ExpressionParser emptyValueExpressionParser = new BeanWrapperExpressionParser();
    private ConversionService conversionService;
    private Validator validator;
    private String fieldMarkerPrefix = "_";
    private BinderConfiguration binderConfiguration;

    /**
     * Creates a new MVC view.
     */
    public AbstractMvcView(org.springframework.web.servlet.View view, RequestContext requestContext) {
        this.view = view;
        this.requestContext = requestContext;
    }

    public void render() throws IOException {
        Map<String, Object> model = new HashMap<String, Object>();
        model.putAll(flowScopes());
        exposeBindingModel(model);
        logger.debug("Rendering MVC [" + view + "] with model map [" + model + "]");
        try {
            doRender(model);
        } catch (Exception e) {
            throw new IOException(e);
        }
    }

    /**
     * Causes the model to be populated from information contained in request parameters.
     * If a view has binding configuration then only model fields specified in the binding configuration will be
     * considered.
     */
    protected MappingResults bind(Object model) {
        if (logger.isDebugEnabled()) {
            logger.debug("Binding to model");
        }
        DefaultMapper mapper = new DefaultMapper();
        ParameterMap requestParameters = requestContext.getRequestParameters();
        if (binderConfiguration != null) {
            addModelBindings(mapper, requestParameters.asMap().keySet(), model);
        } else {
            addDefaultMappings(mapper, requestParameters.asMap().keySet(), model);
        }
        return mapper.map(requestParameters, model);
    }

    /**
     * Adds a {@link DefaultMapping} for every configured view {@link Binding} for which there is an request parameter.
     * If there is no matching incoming request parameter, a special mapping is created that will set the target field
     * on the model to an empty value.
     */
    protected void addModelBindings(DefaultMapper mapper, Set<String> parameterNames, Object model) {
        for (Binding binding : binderConfiguration.getBindings()) {
            String parameterName = binding.getProperty();
            if (parameterNames.contains(parameterName)) {
                addMapping(mapper, binding, model);
            } else {
                if (fieldMarkerPrefix != null && parameterNames.contains(fieldMarkerPrefix + parameterName)) {
                    addEmptyValueMapping(mapper, parameterName, model);
                }
            }
        }
    }

    /**
     * Creates and adds a {@link DefaultMapping} for the given {@link Binding}. Information
     * such as the model field name, if the field is required, and whether type conversion is needed will be passed
     * on from the binding to the DefaultMapping.
     */
    protected void addMapping(DefaultMapper mapper, Binding binding, Object model) {
        Expression source = new RequestParameterExpression(binding.getProperty());
        ParserContext parserContext = new FluentParserContext().evaluate(model.getClass());
        Expression target = expressionParser.parseExpression(binding.getProperty(), parserContext);
        DefaultMapping mapping = new DefaultMapping(source, target);
        mapping.setRequired(binding.getRequired());
        mapper.addMapping(mapping);
    }

    /**
     * Add a {@link DefaultMapping} instance for all incoming request parameters except those having a special field
     * marker prefix.
     */
    protected void addDefaultMappings(DefaultMapper mapper, Set<String> parameterNames, Object model) {
        for (String parameterName : parameterNames) {
            if (fieldMarkerPrefix != null && parameterName.startsWith(fieldMarkerPrefix)) {
                String field = parameterName.substring(fieldMarkerPrefix.length());
                if (!parameterNames.contains(field)) {
                    addEmptyValueMapping(mapper, field, model);
                }
            }
        }
    }

    /**
     * Adds a special {@link DefaultMapping} that results in setting the target field
     * on the model to an empty value. Typically this is null or false.
     */
    protected void addEmptyValueMapping(DefaultMapper mapper, String field, Object model) {
        ParserContext parserContext = new FluentParserContext().evaluate(model.getClass());
        Expression target = emptyValueExpressionParser.parseExpression(field, parserContext);
        try {
            Class<?> propertyType = target.getValueType(model);
            Expression source = new StaticExpression(getEmptyValue(propertyType));
            DefaultMapping mapping = new DefaultMapping(source, target);
            if (logger.isDebugEnabled()) {
                logger.debug("Adding empty value mapping for parameter '" + field + "'");
            }
            mapper.addMapping(mapping);
        } catch (EvaluationException e) {
        }
    }

    private void exposeBindingModel(Map<String, Object> model) {
        Object modelObject = getModelObject();
        if (modelObject != null) {
            model.put("bindingModel", modelObject);
        }
    }

    private Map<String, Object> flowScopes() {
        return requestContext.getConversationScope().asMap();
    }

    private Object getModelObject() {
        return requestContext.getFlowScope().get("model");
    }

    private Object getEmptyValue(Class<?> fieldType) {
        if (fieldType.isPrimitive()) {
            return Boolean.FALSE;
        }
        return null;
    }

    protected abstract void doRender(Map<String, ?> model) throws Exception;
}
